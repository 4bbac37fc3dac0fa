use super::system::AdmissibilitySystem;

/// Least `p <= max_p` such that every letter reaches every letter in exactly
/// `p` admissible steps, i.e. the primitivity index of the transition graph.
/// `None` means no such `p` was found up to `max_p`.
pub fn mixing_exponent(sys: &AdmissibilitySystem, max_p: usize) -> Option<usize> {
    let n = sys.alphabet_size();
    let step: Vec<bool> = (0..n * n).map(|i| sys.allows(i / n, i % n)).collect();
    let mut reach = step.clone();
    for p in 1..=max_p {
        if reach.iter().all(|&r| r) {
            return Some(p);
        }
        let mut next = vec![false; n * n];
        for i in 0..n {
            for k in 0..n {
                if reach[i * n + k] {
                    for j in 0..n {
                        if step[k * n + j] {
                            next[i * n + j] = true;
                        }
                    }
                }
            }
        }
        reach = next;
    }
    None
}
