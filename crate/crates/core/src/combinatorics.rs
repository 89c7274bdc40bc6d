//! Enumeration of k-subsets (colexicographic order) and weak compositions.

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of weak compositions of `k` into `parts` nonnegative parts.
pub fn weak_compositions(k: usize, parts: usize) -> u128 {
    if parts == 0 {
        return u128::from(k == 0);
    }
    binomial(k + parts - 1, parts - 1)
}

/// The k-subset of `{0, ..}` with the given colex rank, as an increasing index list.
pub fn colex_unrank(mut rank: u128, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for i in (1..=k).rev() {
        // largest c with C(c, i) <= rank
        let mut c = i - 1;
        while binomial(c + 1, i) <= rank {
            c += 1;
        }
        rank -= binomial(c, i);
        out[i - 1] = c;
    }
    out
}

/// Advances `subset` (increasing, entries `< n`) to its colex successor.
/// Returns `false` when `subset` was the last one.
pub fn colex_next(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    for i in 0..k {
        let limit = if i + 1 < k { subset[i + 1] } else { n };
        if subset[i] + 1 < limit {
            subset[i] += 1;
            for (t, s) in subset.iter_mut().enumerate().take(i) {
                *s = t;
            }
            return true;
        }
    }
    false
}

/// Visits every weak composition of `total` into `parts.len()` parts in lexicographic
/// order of the part vector, reusing the `parts` buffer.
pub fn for_each_weak_composition(total: usize, parts: &mut [usize], f: &mut impl FnMut(&[usize])) {
    let q = parts.len();
    if q == 0 {
        if total == 0 {
            f(parts);
        }
        return;
    }
    parts.iter_mut().for_each(|p| *p = 0);
    parts[q - 1] = total;
    loop {
        f(parts);
        // find rightmost position (excluding the last) that can be increased,
        // i.e. whose suffix still has mass to borrow
        let mut i = q - 1;
        let mut suffix = parts[q - 1];
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if suffix > 0 {
                break;
            }
            suffix += parts[i];
        }
        parts[i] += 1;
        let rest = suffix - 1;
        for p in parts.iter_mut().take(q - 1).skip(i + 1) {
            *p = 0;
        }
        parts[q - 1] = rest;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
        assert_eq!(weak_compositions(3, 2), 4);
        assert_eq!(weak_compositions(0, 0), 1);
        assert_eq!(weak_compositions(2, 0), 0);
    }

    #[test]
    fn colex_walk_matches_unrank() {
        for n in 0..8 {
            for k in 0..=n {
                let total = binomial(n, k);
                let mut cur: Vec<usize> = (0..k).collect();
                let mut seen = 0u128;
                loop {
                    assert_eq!(colex_unrank(seen, k), cur, "n={n} k={k} rank={seen}");
                    assert!(cur.windows(2).all(|w| w[0] < w[1]));
                    assert!(cur.iter().all(|&c| c < n));
                    seen += 1;
                    if !colex_next(&mut cur, n) {
                        break;
                    }
                }
                assert_eq!(seen, total);
            }
        }
    }

    #[test]
    fn compositions_are_complete_and_ordered() {
        for q in 1..5 {
            for total in 0..6 {
                let mut buf = vec![0; q];
                let mut all = Vec::new();
                for_each_weak_composition(total, &mut buf, &mut |c| all.push(c.to_vec()));
                assert_eq!(all.len() as u128, weak_compositions(total, q));
                assert!(all.iter().all(|c| c.iter().sum::<usize>() == total));
                assert!(all.windows(2).all(|w| w[0] < w[1]));
            }
        }
        let mut empty: [usize; 0] = [];
        let mut count = 0;
        for_each_weak_composition(0, &mut empty, &mut |_| count += 1);
        assert_eq!(count, 1);
    }
}
