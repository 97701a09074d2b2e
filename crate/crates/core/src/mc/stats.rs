/// Running mean and sum of squared deviations for one block of draws.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(a: Moments, b: Moments) -> Moments {
        if a.n == 0 {
            return b;
        }
        if b.n == 0 {
            return a;
        }
        let n = a.n + b.n;
        let delta = b.mean - a.mean;
        let nf = n as f64;
        Moments {
            n,
            mean: a.mean + delta * (b.n as f64 / nf),
            m2: a.m2 + b.m2 + delta * delta * (a.n as f64 * b.n as f64 / nf),
        }
    }

    /// Fixed-shape binary tree reduction: the result depends only on the
    /// order of `blocks`, never on how they were produced.
    pub fn tree_reduce(blocks: &[Moments]) -> Moments {
        match blocks.len() {
            0 => Moments::default(),
            1 => blocks[0],
            len => {
                let (l, r) = blocks.split_at(len / 2);
                Moments::merge(Self::tree_reduce(l), Self::tree_reduce(r))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn merge_matches_single_pass() {
        let xs: alloc::vec::Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let blocks: alloc::vec::Vec<Moments> = xs
            .chunks(64)
            .map(|c| {
                let mut m = Moments::default();
                c.iter().for_each(|&x| m.push(x));
                m
            })
            .collect();
        let t = Moments::tree_reduce(&blocks);
        assert_eq!(t.n, all.n);
        assert_relative_eq!(t.mean, all.mean, max_relative = 1e-13);
        assert_relative_eq!(t.m2, all.m2, max_relative = 1e-12);
    }
}
