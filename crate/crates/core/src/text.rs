//! Unicode helpers shared by every module that compares labels.

use unicode_normalization::UnicodeNormalization;

/// NFC-normalizes `s`.
pub fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// Trims surrounding whitespace and NFC-normalizes.
pub fn nfc_trim(s: &str) -> String {
    s.trim().nfc().collect()
}

/// Key for case-insensitive comparison: NFC, then lowercase.
pub fn fold_key(s: &str) -> String {
    nfc_trim(s).to_lowercase()
}

/// Title-cases an upper-case surname, restarting capitalization after
/// spaces, apostrophes and hyphens (`D'ALEMA` -> `D'Alema`).
pub fn title_case(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut at_start = true;
    for c in s.chars() {
        if at_start {
            out.extend(c.to_uppercase());
        } else {
            out.extend(c.to_lowercase());
        }
        at_start = matches!(c, ' ' | '\'' | '’' | '-');
    }
    out
}
