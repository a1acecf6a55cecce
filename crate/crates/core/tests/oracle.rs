mod common;

use common::{bags, both_roles, brute_force, decode, to_dialogue};
use convshape::{shape, ShapeConfig};
use rayon::prelude::*;

fn sweep(len: usize) -> usize {
    let bags = bags();
    let cfg = ShapeConfig::default();
    let total = (2 * bags.len()).pow(len as u32);
    (0..total)
        .into_par_iter()
        .filter_map(|i| {
            let turns = decode(i, len, &bags);
            if !both_roles(&turns) {
                return None;
            }
            let got = shape(&to_dialogue("x", &turns), &cfg).counts;
            assert_eq!(got, brute_force(&turns), "{turns:?}");
            Some(())
        })
        .count()
}

#[test]
fn exhaustive_up_to_three_utterances() {
    assert_eq!(sweep(1), 0);
    assert_eq!(sweep(2), 2 * 20 * 20);
    assert!(sweep(3) > 0);
}

#[test]
fn hand_checked_case() {
    use common::Turn;
    use convshape::{Role, RoleCounts};
    let turns = vec![
        Turn {
            role: Role::Assistant,
            tokens: vec!["apple", "apple"],
            question: true,
        },
        Turn {
            role: Role::Seeker,
            tokens: vec!["apple", "it"],
            question: false,
        },
        Turn {
            role: Role::Seeker,
            tokens: vec!["pear", "pear"],
            question: false,
        },
        Turn {
            role: Role::Assistant,
            tokens: vec!["that", "plum"],
            question: true,
        },
    ];
    let expected = convshape::PerRole::new(
        RoleCounts {
            questions: 2,
            information: 1,
            repetition: 1,
        },
        RoleCounts {
            questions: 0,
            information: 1,
            repetition: 2,
        },
    );
    assert_eq!(brute_force(&turns), expected);
    assert_eq!(
        shape(&to_dialogue("x", &turns), &ShapeConfig::default()).counts,
        expected
    );
}
