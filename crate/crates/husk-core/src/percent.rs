//! Whole-percent rendering with round-half-up semantics.
//!
//! All human-readable proportions in the tool go through this one function so
//! console, annotated report, and summary tables agree. Integer arithmetic
//! only; rounding 0.5 upward.

use alloc::format;
use alloc::string::String;

/// `round_half_up(100 * num / den)`, or `None` when `den` is zero.
pub fn percent_round_half_up(num: u64, den: u64) -> Option<u32> {
    if den == 0 {
        return None;
    }
    let num = num as u128;
    let den = den as u128;
    Some(((200 * num + den) / (2 * den)) as u32)
}

/// Render as `"85%"`, or `"n/a"` when the denominator is zero.
pub fn fmt_percent(num: u64, den: u64) -> String {
    match percent_round_half_up(num, den) {
        Some(p) => format!("{p}%"),
        None => String::from("n/a"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reported_score_renderings() {
        // Killed/total pairs and their whole-percent renderings.
        assert_eq!(fmt_percent(2_297, 2_706), "85%");
        assert_eq!(fmt_percent(5_813, 7_989), "73%");
        assert_eq!(fmt_percent(55_515, 79_350), "70%");
    }

    #[test]
    fn reported_proportion_renderings() {
        assert_eq!(fmt_percent(291, 2_041), "14%");
        assert_eq!(fmt_percent(835, 11_189), "7%");
        assert_eq!(fmt_percent(1_129, 12_572), "9%");
    }

    #[test]
    fn coverage_adjustment_renderings() {
        assert_eq!(fmt_percent(11_189, 12_572), "89%");
        assert_eq!(fmt_percent(11_189 - 835, 12_572), "82%");
    }

    #[test]
    fn half_rounds_up() {
        assert_eq!(percent_round_half_up(1, 200), Some(1)); // 0.5%
        assert_eq!(percent_round_half_up(3, 200), Some(2)); // 1.5%
        assert_eq!(percent_round_half_up(1, 1000), Some(0)); // 0.1%
    }

    #[test]
    fn plain_thirds() {
        assert_eq!(percent_round_half_up(1, 3), Some(33));
        assert_eq!(percent_round_half_up(2, 3), Some(67));
    }

    #[test]
    fn degenerate_and_extremes() {
        assert_eq!(percent_round_half_up(0, 0), None);
        assert_eq!(fmt_percent(0, 0), "n/a");
        assert_eq!(percent_round_half_up(0, 5), Some(0));
        assert_eq!(percent_round_half_up(5, 5), Some(100));
    }

    #[test]
    fn no_overflow_at_large_counts() {
        assert_eq!(percent_round_half_up(u64::MAX / 2, u64::MAX), Some(50));
    }
}
