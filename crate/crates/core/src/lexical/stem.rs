//! Light suffix stemmer: plural and `-ed`/`-ing` removal only.
//!
//! Roughly steps 1a and 1b of Porter's algorithm, with two changes: the
//! stem is kept in dictionary-like form (`movies` -> `movie`, `liked` ->
//! `like`) instead of Porter's truncated stems, and `-ies` plurals map to
//! `-y` unless the singular is a known `-ie` noun.

// Singular nouns ending in "ie"; their "-ies" plurals keep the "ie".
const IE_NOUNS: &[&str] = &[
    "auntie",
    "barbie",
    "birdie",
    "boogie",
    "bookie",
    "brownie",
    "budgie",
    "calorie",
    "collie",
    "cookie",
    "coterie",
    "cutie",
    "die",
    "eerie",
    "foodie",
    "freebie",
    "genie",
    "goalie",
    "groupie",
    "hippie",
    "hoodie",
    "indie",
    "junkie",
    "lie",
    "lingerie",
    "magpie",
    "menagerie",
    "movie",
    "necktie",
    "newbie",
    "pie",
    "pixie",
    "prairie",
    "reverie",
    "rookie",
    "selfie",
    "smoothie",
    "sortie",
    "sweetie",
    "talkie",
    "tie",
    "veggie",
    "yuppie",
    "zombie",
];

// Words that look plural but are not.
const INVARIANT: &[&str] = &[
    "always",
    "bias",
    "chaos",
    "gas",
    "lens",
    "news",
    "perhaps",
    "physics",
    "series",
    "species",
    "thus",
    "yes",
    "sometimes",
    "whereas",
    "besides",
    "towards",
];

fn is_consonant(w: &[u8], i: usize) -> bool {
    match w[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(w, i - 1),
        _ => true,
    }
}

/// Number of vowel-consonant sequences in `w`.
fn measure(w: &[u8]) -> usize {
    let mut m = 0;
    let mut i = 0;
    while i < w.len() && is_consonant(w, i) {
        i += 1;
    }
    while i < w.len() {
        while i < w.len() && !is_consonant(w, i) {
            i += 1;
        }
        if i == w.len() {
            break;
        }
        m += 1;
        while i < w.len() && is_consonant(w, i) {
            i += 1;
        }
    }
    m
}

fn has_vowel(w: &[u8]) -> bool {
    (0..w.len()).any(|i| !is_consonant(w, i))
}

fn ends_double_consonant(w: &[u8]) -> bool {
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1)
}

// consonant-vowel-consonant ending, final consonant not w, x or y
fn ends_cvc(w: &[u8]) -> bool {
    let n = w.len();
    n >= 3
        && is_consonant(w, n - 3)
        && !is_consonant(w, n - 2)
        && is_consonant(w, n - 1)
        && !matches!(w[n - 1], b'w' | b'x' | b'y')
}

fn strip_plural(word: &str) -> String {
    if INVARIANT.contains(&word) {
        return word.to_string();
    }
    if let Some(base) = word.strip_suffix("sses") {
        return format!("{base}ss");
    }
    if let Some(base) = word.strip_suffix("ies") {
        let ie = format!("{base}ie");
        if IE_NOUNS.contains(&ie.as_str()) || base.len() < 2 {
            return ie;
        }
        return format!("{base}y");
    }
    if word.len() >= 4
        && word.ends_with('s')
        && !word.ends_with("ss")
        && !word.ends_with("us")
        && !word.ends_with("is")
    {
        return word[..word.len() - 1].to_string();
    }
    word.to_string()
}

fn strip_verbal(word: &str) -> String {
    if let Some(base) = word.strip_suffix("eed") {
        return if measure(base.as_bytes()) > 0 {
            format!("{base}ee")
        } else {
            word.to_string()
        };
    }
    if let Some(base) = word.strip_suffix("ied") {
        let ie = format!("{base}ie");
        if IE_NOUNS.contains(&ie.as_str()) || base.len() < 2 {
            return ie;
        }
        return format!("{base}y");
    }
    let base = word
        .strip_suffix("ing")
        .or_else(|| word.strip_suffix("ed"))
        .filter(|b| has_vowel(b.as_bytes()));
    let Some(base) = base else {
        return word.to_string();
    };
    let b = base.as_bytes();
    if base.ends_with("at") || base.ends_with("bl") || base.ends_with("iz") {
        format!("{base}e")
    } else if ends_double_consonant(b) && !matches!(b[b.len() - 1], b'l' | b's' | b'z') {
        base[..base.len() - 1].to_string()
    } else if measure(b) == 1 && ends_cvc(b) {
        format!("{base}e")
    } else {
        base.to_string()
    }
}

/// Stems a lowercase word. Words with non-ASCII-letter characters or fewer
/// than three letters pass through unchanged.
pub fn stem(word: &str) -> String {
    if word.len() < 3 || !word.bytes().all(|b| b.is_ascii_lowercase()) {
        return word.to_string();
    }
    strip_verbal(&strip_plural(word))
}
