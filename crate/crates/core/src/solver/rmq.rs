//! Sparse-table range queries returning the position of the extreme value,
//! lowest position on ties.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Extreme {
    Min,
    Max,
}

#[derive(Debug, Clone)]
pub(crate) struct SparseTable {
    extreme: Extreme,
    n: usize,
    // levels[k][i] = position of the extreme over [i, i + 2^k)
    levels: Vec<Vec<u32>>,
}

impl SparseTable {
    /// Builds a table over `len` values read through `value`.
    pub fn build(len: usize, extreme: Extreme, value: impl Fn(usize) -> f64) -> Self {
        let mut levels = vec![(0..len as u32).collect::<Vec<u32>>()];
        let mut width = 1;
        while 2 * width <= len {
            let prev = levels.last().unwrap();
            let next = (0..=len - 2 * width)
                .map(|i| pick(extreme, &value, prev[i], prev[i + width]))
                .collect();
            levels.push(next);
            width *= 2;
        }
        SparseTable { extreme, n: len, levels }
    }

    /// Position of the extreme value over the inclusive range `[a, b]`.
    pub fn query(&self, a: usize, b: usize, value: impl Fn(usize) -> f64) -> usize {
        debug_assert!(a <= b && b < self.n);
        let k = (usize::BITS - 1 - (b - a + 1).leading_zeros()) as usize;
        let level = &self.levels[k];
        pick(self.extreme, &value, level[a], level[b + 1 - (1 << k)]) as usize
    }
}

fn pick(extreme: Extreme, value: &impl Fn(usize) -> f64, a: u32, b: u32) -> u32 {
    let (va, vb) = (value(a as usize), value(b as usize));
    let a_wins = match extreme {
        Extreme::Min => va < vb,
        Extreme::Max => va > vb,
    };
    let b_wins = match extreme {
        Extreme::Min => vb < va,
        Extreme::Max => vb > va,
    };
    if a_wins {
        a
    } else if b_wins {
        b
    } else {
        a.min(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(v: &[f64], a: usize, b: usize, extreme: Extreme) -> usize {
        let mut best = a;
        for i in a..=b {
            let better = match extreme {
                Extreme::Min => v[i] < v[best],
                Extreme::Max => v[i] > v[best],
            };
            if better {
                best = i;
            }
        }
        best
    }

    #[test]
    fn ties_go_to_lowest_position() {
        let v = [3.0, 1.0, 2.0, 1.0, 1.0, 5.0, 5.0];
        let t = SparseTable::build(v.len(), Extreme::Min, |i| v[i]);
        assert_eq!(t.query(0, 6, |i| v[i]), 1);
        assert_eq!(t.query(2, 6, |i| v[i]), 3);
        let t = SparseTable::build(v.len(), Extreme::Max, |i| v[i]);
        assert_eq!(t.query(0, 6, |i| v[i]), 5);
        assert_eq!(t.query(2, 2, |i| v[i]), 2);
    }

    proptest! {
        #[test]
        fn matches_linear_scan(v in prop::collection::vec(0i32..6, 1..70), qs in prop::collection::vec((0usize..70, 0usize..70), 20)) {
            let v: Vec<f64> = v.into_iter().map(f64::from).collect();
            for extreme in [Extreme::Min, Extreme::Max] {
                let t = SparseTable::build(v.len(), extreme, |i| v[i]);
                for &(x, y) in &qs {
                    let (a, b) = (x.min(y) % v.len(), x.max(y) % v.len());
                    let (a, b) = (a.min(b), a.max(b));
                    prop_assert_eq!(t.query(a, b, |i| v[i]), brute(&v, a, b, extreme));
                }
            }
        }
    }
}
