//! Brute-force reference for the shape counts and an exhaustive enumerator of
//! tiny dialogues. Shared with the CLI acceptance suite.

#![allow(dead_code)]

use convshape::{Dialogue, PerRole, Role, RoleCounts, UtteranceTag, ANAPHORA};

pub const VOCABULARY: [&str; 5] = ["apple", "pear", "plum", "it", "that"];

/// A tiny utterance: speaker, raw tokens, and whether it is a question.
#[derive(Debug, Clone)]
pub struct Turn {
    pub role: Role,
    pub tokens: Vec<&'static str>,
    pub question: bool,
}

/// All multisets of one or two vocabulary words, in a fixed order.
pub fn bags() -> Vec<Vec<&'static str>> {
    let mut out: Vec<Vec<&'static str>> = VOCABULARY.iter().map(|w| vec![*w]).collect();
    for (i, first) in VOCABULARY.iter().enumerate() {
        for second in &VOCABULARY[i..] {
            out.push(vec![*first, *second]);
        }
    }
    out
}

/// Number of distinct single utterances (role x bag).
pub fn choices() -> usize {
    2 * bags().len()
}

/// Decodes the `index`-th dialogue of exactly `len` utterances. Odd bags are
/// questions so every pattern of asking is covered across the sweep.
pub fn decode(mut index: usize, len: usize, bags: &[Vec<&'static str>]) -> Vec<Turn> {
    let per = 2 * bags.len();
    (0..len)
        .map(|_| {
            let c = index % per;
            index /= per;
            let (role, b) = if c < bags.len() {
                (Role::Assistant, c)
            } else {
                (Role::Seeker, c - bags.len())
            };
            Turn {
                role,
                tokens: bags[b].clone(),
                question: b % 2 == 1,
            }
        })
        .collect()
}

pub fn both_roles(turns: &[Turn]) -> bool {
    turns.iter().any(|t| t.role == Role::Assistant) && turns.iter().any(|t| t.role == Role::Seeker)
}

pub fn to_dialogue(id: &str, turns: &[Turn]) -> Dialogue {
    let mut d = Dialogue::from_turns(
        id,
        "oracle",
        turns.iter().map(|t| {
            let mut text = t.tokens.join(" ");
            if t.question {
                text.push('?');
            }
            (t.role, text)
        }),
    );
    for (u, t) in d.utterances.iter_mut().zip(turns) {
        u.tag = Some(if t.question {
            UtteranceTag::YnQuestion
        } else {
            UtteranceTag::Statement
        });
    }
    d
}

/// Recounts everything from scratch with nested scans and no shared state.
pub fn brute_force(turns: &[Turn]) -> PerRole<RoleCounts> {
    let occurrences: Vec<(Role, &str)> = turns
        .iter()
        .flat_map(|t| t.tokens.iter().map(move |w| (t.role, *w)))
        .collect();
    let is_anaphor = |w: &str| ANAPHORA.contains(&w);
    let freq = |w: &str| occurrences.iter().filter(|(_, x)| *x == w).count();
    let first_speaker = |w: &str| occurrences.iter().find(|(_, x)| *x == w).map(|(r, _)| *r);

    let mut counts: PerRole<RoleCounts> = PerRole::default();
    for t in turns {
        if t.question {
            counts.get_mut(t.role).questions += 1;
        }
    }
    for (i, (_, w)) in occurrences.iter().enumerate() {
        let seen_before = occurrences[..i].iter().any(|(_, x)| x == w);
        if seen_before || is_anaphor(w) || freq(w) < 2 {
            continue;
        }
        let first = first_speaker(w).unwrap();
        counts.get_mut(first).information += 1;
        let other = first.other();
        if occurrences.iter().any(|(r, x)| *r == other && x == w) {
            counts.get_mut(other).repetition += 1;
        }
    }
    for (r, w) in &occurrences {
        if is_anaphor(w) {
            counts.get_mut(*r).repetition += 1;
        }
    }
    counts
}
