//! Porter suffix-stripping stemmer (1980 definition).
//!
//! Operates on lowercase ASCII words. The measure `m` of a word counts the
//! vowel-consonant sequences in its `[C](VC)^m[V]` form; every conditional
//! rule below tests `m` of the stem left after removing the candidate
//! suffix. Within a step, only the longest matching suffix is considered;
//! if its condition fails the step changes nothing. Words of one or two
//! letters are returned unchanged.

/// Stem one token. Tokens containing anything other than lowercase ASCII
/// letters pass through unchanged.
pub fn stem(token: &str) -> String {
    if token.len() <= 2 || !token.bytes().all(|b| b.is_ascii_lowercase()) {
        return token.to_string();
    }
    let mut word = token.as_bytes().to_vec();
    step1a(&mut word);
    step1b(&mut word);
    step1c(&mut word);
    step2(&mut word);
    step3(&mut word);
    step4(&mut word);
    step5a(&mut word);
    step5b(&mut word);
    String::from_utf8(word).expect("stemmer operates on ASCII")
}

/// A letter is a consonant unless it is a, e, i, o, u, or a y preceded by a
/// consonant.
fn is_consonant(word: &[u8], i: usize) -> bool {
    match word[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(word, i - 1),
        _ => true,
    }
}

fn measure(stem: &[u8]) -> usize {
    let mut m = 0;
    let mut i = 0;
    while i < stem.len() && is_consonant(stem, i) {
        i += 1;
    }
    loop {
        while i < stem.len() && !is_consonant(stem, i) {
            i += 1;
        }
        if i == stem.len() {
            return m;
        }
        while i < stem.len() && is_consonant(stem, i) {
            i += 1;
        }
        m += 1;
        if i == stem.len() {
            return m;
        }
    }
}

fn has_vowel(stem: &[u8]) -> bool {
    (0..stem.len()).any(|i| !is_consonant(stem, i))
}

fn ends_double_consonant(word: &[u8]) -> bool {
    let n = word.len();
    n >= 2 && word[n - 1] == word[n - 2] && is_consonant(word, n - 1)
}

/// `*o`: the stem ends consonant-vowel-consonant where the final consonant
/// is not w, x, or y.
fn ends_cvc(stem: &[u8]) -> bool {
    let n = stem.len();
    n >= 3
        && is_consonant(stem, n - 3)
        && !is_consonant(stem, n - 2)
        && is_consonant(stem, n - 1)
        && !matches!(stem[n - 1], b'w' | b'x' | b'y')
}

fn ends_with(word: &[u8], suffix: &[u8]) -> bool {
    word.len() >= suffix.len() && &word[word.len() - suffix.len()..] == suffix
}

/// Replace the longest matching suffix from `rules` if the remaining stem
/// has measure greater than `m_floor`.
fn apply_rule_table(word: &mut Vec<u8>, rules: &[(&[u8], &[u8])], m_floor: usize) {
    let mut best: Option<(&[u8], &[u8])> = None;
    for &(from, to) in rules {
        if ends_with(word, from) && best.is_none_or(|(b, _)| from.len() > b.len()) {
            best = Some((from, to));
        }
    }
    if let Some((from, to)) = best {
        let stem_len = word.len() - from.len();
        if measure(&word[..stem_len]) > m_floor {
            word.truncate(stem_len);
            word.extend_from_slice(to);
        }
    }
}

fn step1a(word: &mut Vec<u8>) {
    if ends_with(word, b"sses") || ends_with(word, b"ies") {
        word.truncate(word.len() - 2);
    } else if !ends_with(word, b"ss") && ends_with(word, b"s") {
        word.pop();
    }
}

fn step1b(word: &mut Vec<u8>) {
    if ends_with(word, b"eed") {
        if measure(&word[..word.len() - 3]) > 0 {
            word.pop();
        }
        return;
    }
    let removed = if ends_with(word, b"ed") && has_vowel(&word[..word.len() - 2]) {
        word.truncate(word.len() - 2);
        true
    } else if ends_with(word, b"ing") && has_vowel(&word[..word.len() - 3]) {
        word.truncate(word.len() - 3);
        true
    } else {
        false
    };
    if removed {
        if ends_with(word, b"at") || ends_with(word, b"bl") || ends_with(word, b"iz") {
            word.push(b'e');
        } else if ends_double_consonant(word) && !matches!(word[word.len() - 1], b'l' | b's' | b'z')
        {
            word.pop();
        } else if measure(word) == 1 && ends_cvc(word) {
            word.push(b'e');
        }
    }
}

fn step1c(word: &mut [u8]) {
    let n = word.len();
    if n >= 1 && word[n - 1] == b'y' && has_vowel(&word[..n - 1]) {
        word[n - 1] = b'i';
    }
}

fn step2(word: &mut Vec<u8>) {
    const RULES: &[(&[u8], &[u8])] = &[
        (b"ational", b"ate"),
        (b"tional", b"tion"),
        (b"enci", b"ence"),
        (b"anci", b"ance"),
        (b"izer", b"ize"),
        (b"abli", b"able"),
        (b"alli", b"al"),
        (b"entli", b"ent"),
        (b"eli", b"e"),
        (b"ousli", b"ous"),
        (b"ization", b"ize"),
        (b"ation", b"ate"),
        (b"ator", b"ate"),
        (b"alism", b"al"),
        (b"iveness", b"ive"),
        (b"fulness", b"ful"),
        (b"ousness", b"ous"),
        (b"aliti", b"al"),
        (b"iviti", b"ive"),
        (b"biliti", b"ble"),
    ];
    apply_rule_table(word, RULES, 0);
}

fn step3(word: &mut Vec<u8>) {
    const RULES: &[(&[u8], &[u8])] = &[
        (b"icate", b"ic"),
        (b"ative", b""),
        (b"alize", b"al"),
        (b"iciti", b"ic"),
        (b"ical", b"ic"),
        (b"ful", b""),
        (b"ness", b""),
    ];
    apply_rule_table(word, RULES, 0);
}

fn step4(word: &mut Vec<u8>) {
    const SUFFIXES: &[&[u8]] = &[
        b"al", b"ance", b"ence", b"er", b"ic", b"able", b"ible", b"ant", b"ement", b"ment", b"ent",
        b"ion", b"ou", b"ism", b"ate", b"iti", b"ous", b"ive", b"ize",
    ];
    let mut best: Option<&[u8]> = None;
    for &suffix in SUFFIXES {
        if ends_with(word, suffix) && best.is_none_or(|b| suffix.len() > b.len()) {
            best = Some(suffix);
        }
    }
    if let Some(suffix) = best {
        let stem_len = word.len() - suffix.len();
        let stem = &word[..stem_len];
        // "ion" only drops after a stem ending in s or t.
        let ion_ok = suffix != b"ion" || matches!(stem.last(), Some(b's') | Some(b't'));
        if ion_ok && measure(stem) > 1 {
            word.truncate(stem_len);
        }
    }
}

fn step5a(word: &mut Vec<u8>) {
    if ends_with(word, b"e") {
        let stem = &word[..word.len() - 1];
        let m = measure(stem);
        if m > 1 || (m == 1 && !ends_cvc(stem)) {
            word.pop();
        }
    }
}

fn step5b(word: &mut Vec<u8>) {
    if ends_with(word, b"l") && ends_double_consonant(word) && measure(word) > 1 {
        word.pop();
    }
}
