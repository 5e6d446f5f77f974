//! Enumeration of desk-scale parameter grids.

use crate::group::{Bicharacter, FinAbGroup, Subgroup};

/// Abelian groups of order at most `max_order`, one per isomorphism type, as invariant
/// factor lists `m_1 | m_2 | ...`; ordered by order, then factors.
pub fn groups_up_to(max_order: usize) -> Vec<FinAbGroup> {
    fn chains(order: usize, min: usize, out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>) {
        if order == 1 {
            out.push(cur.clone());
            return;
        }
        for m in min.max(2)..=order {
            if order.is_multiple_of(m) && cur.last().is_none_or(|&l| m % l as usize == 0) {
                cur.push(m as u32);
                chains(order / m, m, out, cur);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    for order in 1..=max_order {
        let mut found = Vec::new();
        chains(order, 2, &mut found, &mut Vec::new());
        // A chain m_1 | m_2 | ... needs every later factor divisible by the earlier ones.
        found.retain(|c| c.windows(2).all(|w| w[1] % w[0] == 0));
        found.sort();
        out.extend(found.into_iter().map(|f| FinAbGroup::new(&f).expect("valid factors")));
    }
    out
}

/// All `(T, beta)` with `T` of square order and `beta` nondegenerate alternating on `T`.
pub fn division_data(g: &FinAbGroup) -> Vec<(Subgroup, Bicharacter)> {
    let mut out = Vec::new();
    for t in Subgroup::all(g) {
        if t.sqrt_order().is_none() {
            continue;
        }
        for beta in Bicharacter::enumerate_nondegenerate(&t) {
            out.push((t.clone(), beta));
        }
    }
    out
}

/// All `kappa` in `N^k` with `1 <= |kappa| <= max_total`, lexicographic.
pub fn kappas(k: usize, max_total: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            if cur.iter().any(|&x| x > 0) {
                out.push(cur.clone());
            }
            return;
        }
        for v in 0..=left {
            cur.push(v);
            rec(k, left - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, max_total, &mut Vec::with_capacity(k), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_of_order_at_most_eight() {
        let gs: Vec<Vec<u32>> = groups_up_to(8).iter().map(|g| g.factors().to_vec()).collect();
        assert_eq!(
            gs,
            vec![
                vec![],
                vec![2],
                vec![3],
                vec![2, 2],
                vec![4],
                vec![5],
                vec![6],
                vec![7],
                vec![2, 2, 2],
                vec![2, 4],
                vec![8]
            ]
        );
    }

    #[test]
    fn kappa_counts() {
        assert_eq!(kappas(2, 2).len(), 5);
        assert_eq!(kappas(8, 12).len(), 125969);
        assert_eq!(kappas(1, 3), vec![vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn division_data_counts() {
        let g = FinAbGroup::new(&[2, 2]).unwrap();
        let d = division_data(&g);
        // trivial T, and the whole group with its unique nondegenerate beta.
        assert_eq!(d.len(), 2);
        let g = FinAbGroup::new(&[2, 4]).unwrap();
        assert!(division_data(&g).iter().any(|(t, _)| t.order() == 4));
    }
}
