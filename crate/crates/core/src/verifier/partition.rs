//! Set partitions of `{0, …, m−1}` in restricted-growth-string order.

use crate::valuation::ItemSet;

/// Every partition of the first `m` items into non-empty blocks. Block `b`
/// is the set of positions whose restricted-growth digit equals `b`.
pub fn set_partitions(m: usize) -> Vec<Vec<ItemSet>> {
    let mut out = Vec::new();
    if m == 0 {
        out.push(Vec::new());
        return out;
    }
    // a[i] ≤ 1 + max(a[0..i]), a[0] = 0.
    let mut a = vec![0usize; m];
    loop {
        let blocks = a.iter().max().map_or(0, |&b| b + 1);
        let mut part = vec![ItemSet::EMPTY; blocks];
        for (item, &b) in a.iter().enumerate() {
            part[b] = part[b].union(ItemSet::singleton(item));
        }
        out.push(part);
        // Advance the rightmost digit that can still grow.
        let mut i = m - 1;
        loop {
            if i == 0 {
                return out;
            }
            let prefix_max = a[..i].iter().copied().max().unwrap_or(0);
            if a[i] <= prefix_max {
                a[i] += 1;
                for x in a[i + 1..].iter_mut() {
                    *x = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// Bell numbers by the triangle recurrence.
pub fn bell(m: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..m {
        let mut next = vec![*row.last().unwrap()];
        for x in &row {
            let v = next.last().unwrap() + x;
            next.push(v);
        }
        row = next;
    }
    row[0]
}
