use std::collections::BTreeMap;

/// Exponentially smoothed reward plus the empirical distribution of reward
/// values over `(−1, 0, +1)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scent {
    pub scalar: f64,
    pub counts: [usize; 3],
}

impl Scent {
    fn record(&mut self, reward: i8, lambda: f64) {
        self.scalar = lambda * f64::from(reward) + (1.0 - lambda) * self.scalar;
        self.counts[(reward + 1) as usize] += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Frequencies of `−1, 0, +1`; all zero before any reward is seen.
    pub fn distribution(&self) -> [f64; 3] {
        let n = self.total();
        if n == 0 {
            return [0.0; 3];
        }
        self.counts.map(|c| c as f64 / n as f64)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScentStats {
    pub overall: Scent,
    pub per_patch: BTreeMap<String, Scent>,
    /// Number of times consecutive rewards came from different patches.
    pub patch_switches: usize,
}

impl ScentStats {
    /// `s_t = λ·r_t + (1 − λ)·s_{t−1}` with `s_0 = 0`, overall and per patch.
    pub fn from_rewards<'a, I>(trace: I, lambda: f64) -> Self
    where
        I: IntoIterator<Item = (&'a str, i8)>,
    {
        let mut stats = ScentStats::default();
        let mut last: Option<&str> = None;
        for (patch, reward) in trace {
            debug_assert!((-1..=1).contains(&reward));
            stats.overall.record(reward, lambda);
            stats
                .per_patch
                .entry(patch.to_string())
                .or_default()
                .record(reward, lambda);
            if last.is_some_and(|p| p != patch) {
                stats.patch_switches += 1;
            }
            last = Some(patch);
        }
        stats
    }

    pub fn scalar(&self) -> f64 {
        self.overall.scalar
    }

    pub fn distribution(&self) -> [f64; 3] {
        self.overall.distribution()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scent(rewards: &[i8], lambda: f64) -> ScentStats {
        ScentStats::from_rewards(rewards.iter().map(|&r| ("p", r)), lambda)
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(scent(&[1, 1, 0], 0.3).distribution(), [0.0, 1.0 / 3.0, 2.0 / 3.0]);
        assert_eq!(scent(&[-1, -1, -1], 1.0).scalar(), -1.0);
        assert_eq!(scent(&[1, -1], 0.5).scalar(), -0.25);
        assert_eq!(scent(&[], 0.5).distribution(), [0.0; 3]);
    }

    #[test]
    fn per_patch_and_switches() {
        let s = ScentStats::from_rewards([("a", 1), ("a", 0), ("b", -1), ("a", 1)], 1.0);
        assert_eq!(s.patch_switches, 2);
        assert_eq!(s.per_patch["a"].counts, [0, 1, 2]);
        assert_eq!(s.per_patch["b"].scalar, -1.0);
    }
}
