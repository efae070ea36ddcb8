//! Identifier helpers shared by both calculi: ordering, freshness and the
//! naming policy for allocated qubits and channels.

use std::cmp::Ordering;
use std::collections::HashSet;

/// Orders `q2` before `q10`: alphabetic prefix first, then any trailing
/// number numerically, then the raw string.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let split = |s: &str| {
        let cut = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (head, tail) = s.split_at(cut);
        (head.to_string(), tail.parse::<u128>().ok())
    };
    let (ha, na) = split(a);
    let (hb, nb) = split(b);
    ha.cmp(&hb).then(na.cmp(&nb)).then_with(|| a.cmp(b))
}

pub fn is_integer_literal(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Name for a qubit allocated into a register of `taken.len()` qubits:
/// `q<len>` unless that is taken.
pub fn fresh_qubit_name<S: AsRef<str>>(taken: &[S]) -> String {
    let used: HashSet<&str> = taken.iter().map(|s| s.as_ref()).collect();
    let base = format!("q{}", taken.len());
    if !used.contains(base.as_str()) {
        return base;
    }
    (1..).map(|k| format!("{base}_{k}")).find(|n| !used.contains(n.as_str())).unwrap()
}

/// Fresh channel name from the reserved `#ch` namespace.
pub fn fresh_channel_name(used: &HashSet<String>) -> String {
    (0..).map(|k| format!("#ch{k}")).find(|n| !used.contains(n)).unwrap()
}

/// Variant of `base` not in `used`, for capture-avoiding renaming.
pub fn fresh_variant(base: &str, used: &HashSet<String>) -> String {
    let stem = base.split('_').next().filter(|s| !s.is_empty()).unwrap_or("v");
    let stem = if is_integer_literal(stem) { "v" } else { stem };
    (1..).map(|k| format!("{stem}_{k}")).find(|n| !used.contains(n)).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_order_is_numeric_on_suffix() {
        let mut v = vec!["q10", "q2", "b", "a1", "q1"];
        v.sort_by(|a, b| natural_cmp(a, b));
        assert_eq!(v, vec!["a1", "b", "q1", "q2", "q10"]);
    }

    #[test]
    fn fresh_qubit_names_follow_register_length() {
        assert_eq!(fresh_qubit_name(&["q0", "q1"]), "q2");
        assert_eq!(fresh_qubit_name(&["q1", "q0"]), "q2");
        assert_eq!(fresh_qubit_name(&["q2", "q0"]), "q2_1");
    }

    #[test]
    fn fresh_variants_avoid_used_names() {
        let used: HashSet<String> = ["x".to_string(), "x_1".to_string()].into();
        assert_eq!(fresh_variant("x", &used), "x_2");
        assert_eq!(fresh_variant("3", &HashSet::new()), "v_1");
        assert_eq!(fresh_channel_name(&["#ch0".to_string()].into()), "#ch1");
    }
}
