//! Continuous-time trimmed-mean consensus (ARC-P): order statistics, the
//! trimmed-mean drift, and its bridge to joint-agent interaction topologies.

use thiserror::Error;

use crate::dynamics::NetworkDynamics;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArcpError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, ArcpError>;

/// All-to-all trimmed-mean protocol: `trim` extremes are discarded from each
/// side of the sorted state before averaging. Requires `n - trim >= trim + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArcpConfig {
    n: usize,
    trim: usize,
}

impl ArcpConfig {
    pub fn new(n: usize, trim: usize) -> Result<Self> {
        if trim == 0 {
            return Err(ArcpError::InvalidArgument("trim must be at least 1".into()));
        }
        if n < 2 * trim + 1 {
            return Err(ArcpError::InvalidArgument(format!(
                "need n - trim >= trim + 1, got n={n}, trim={trim}"
            )));
        }
        Ok(Self { n, trim })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn trim(&self) -> usize {
        self.trim
    }
}

fn check_rank(len: usize, k: usize) -> Result<()> {
    if k == 0 || k > len {
        return Err(ArcpError::InvalidArgument(format!(
            "rank {k} out of range for a vector of length {len}"
        )));
    }
    Ok(())
}

fn sorted_ascending(x: &[f64]) -> Vec<f64> {
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("order statistics need finite entries"));
    s
}

/// Value of rank `k` from the top (1-based, multiset semantics for ties).
pub fn kth_largest(x: &[f64], k: usize) -> Result<f64> {
    check_rank(x.len(), k)?;
    Ok(sorted_ascending(x)[x.len() - k])
}

/// Value of rank `k` from the bottom (1-based).
pub fn kth_smallest(x: &[f64], k: usize) -> Result<f64> {
    check_rank(x.len(), k)?;
    Ok(sorted_ascending(x)[k - 1])
}

/// Mean of the sorted middle slice after trimming `trim` entries from each
/// side. Both the top-trimmed and the bottom-trimmed sums reduce to this same
/// slice, summed in ascending order, so the two are bitwise identical. The
/// mean is anchored at the smallest kept value so that consensus states map
/// to themselves exactly.
pub(crate) fn trimmed_mean(x: &[f64], trim: usize) -> f64 {
    let s = sorted_ascending(x);
    let kept = &s[trim..s.len() - trim];
    let base = kept[0];
    base + kept.iter().map(|v| v - base).sum::<f64>() / kept.len() as f64
}

/// Trimmed-mean drift: every agent is steered toward the mean of the
/// mid-ranked values.
pub fn arcp_rhs(cfg: ArcpConfig, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != cfg.n {
        return Err(ArcpError::InvalidArgument(format!(
            "state length {} does not match n={}",
            x.len(),
            cfg.n
        )));
    }
    let mean = trimmed_mean(x, cfg.trim);
    Ok(x.iter().map(|&xi| mean - xi).collect())
}

/// Wraps the trimmed-mean drift as a dynamics object whose implied
/// minimal-influence topology is: every group of `trim + 1` agents influences
/// each agent outside it.
pub fn as_network_dynamics(cfg: ArcpConfig) -> NetworkDynamics {
    NetworkDynamics::trimmed_mean_network(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn order_statistic_basics() {
        let x = [3.0, 1.0, 2.0];
        assert_eq!(kth_largest(&x, 1).unwrap(), 3.0);
        assert_eq!(kth_largest(&x, 3).unwrap(), 1.0);
        assert_eq!(kth_smallest(&x, 1).unwrap(), 1.0);
        assert_eq!(kth_smallest(&x, 2).unwrap(), 2.0);
        assert!(kth_largest(&x, 0).is_err());
        assert!(kth_smallest(&x, 4).is_err());
    }

    #[test]
    fn rank_reversal_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(1..=9);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
            for k in 1..=n {
                assert_eq!(
                    kth_largest(&x, k).unwrap(),
                    kth_smallest(&x, n + 1 - k).unwrap()
                );
            }
        }
    }

    /// Brute-force max-over-subsets form of the k-th largest entry.
    fn kth_largest_by_subsets(x: &[f64], k: usize) -> f64 {
        crate::dynamics::combinations(&(0..x.len()).collect::<Vec<_>>(), k)
            .into_iter()
            .map(|j| j.iter().map(|&i| x[i]).fold(f64::INFINITY, f64::min))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn max_min_representation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let n = rng.gen_range(1..=6);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
            for k in 1..=n {
                assert_eq!(kth_largest(&x, k).unwrap(), kth_largest_by_subsets(&x, k));
            }
        }
    }

    #[test]
    fn rhs_consensus_and_group_cases() {
        let cfg = ArcpConfig::new(5, 1).unwrap();
        // consensus state
        assert_eq!(arcp_rhs(cfg, &[2.0; 5]).unwrap(), vec![0.0; 5]);
        // a group of trim+1 agents at xj, the rest at xi: drift (xj - xi) / (n - 2 trim)
        let (xj, xi) = (7.0, 1.0);
        let x = [xj, xj, xi, xi, xi];
        let dx = arcp_rhs(cfg, &x).unwrap();
        for d in &dx[2..] {
            assert!((d - (xj - xi) / 3.0).abs() < 1e-15);
        }
        // a single deviant is trimmed away entirely
        let x = [xj, xi, xi, xi, xi];
        let dx = arcp_rhs(cfg, &x).unwrap();
        for d in &dx[1..] {
            assert_eq!(*d, 0.0);
        }
        assert!(arcp_rhs(cfg, &[0.0; 4]).is_err());
    }

    #[test]
    fn trim_sum_identity_exact_after_sorting() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let n = rng.gen_range(3..=9);
            let trim = rng.gen_range(1..=(n - 1) / 2);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();
            let top: Vec<f64> =
                (trim + 1..=n - trim).map(|k| kth_largest(&x, k).unwrap()).collect();
            let bottom: Vec<f64> =
                (trim + 1..=n - trim).map(|k| kth_smallest(&x, k).unwrap()).collect();
            let mut top_sorted = top.clone();
            top_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut bottom_sorted = bottom.clone();
            bottom_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(top_sorted, bottom_sorted);
            // summed in a common order the trimmed sums agree exactly
            assert_eq!(
                top_sorted.iter().sum::<f64>().to_bits(),
                bottom_sorted.iter().sum::<f64>().to_bits()
            );
        }
    }

    #[test]
    fn rhs_permutation_and_translation() {
        let cfg = ArcpConfig::new(5, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let dx = arcp_rhs(cfg, &x).unwrap();
            // permutation equivariance (rotate by one)
            let mut xp = x.clone();
            xp.rotate_left(1);
            let mut dxp_expected = dx.clone();
            dxp_expected.rotate_left(1);
            assert_eq!(arcp_rhs(cfg, &xp).unwrap(), dxp_expected);
            // translation invariance
            let shifted: Vec<f64> = x.iter().map(|v| v + 3.25).collect();
            let dxs = arcp_rhs(cfg, &shifted).unwrap();
            for (a, b) in dx.iter().zip(&dxs) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn implied_topology_counts() {
        let cfg = ArcpConfig::new(5, 1).unwrap();
        let d = as_network_dynamics(cfg);
        assert_eq!(d.rules().len(), 30);
        for i in 0..5 {
            assert_eq!(d.rules().iter().filter(|r| r.target.0 == i).count(), 6);
        }
        assert_eq!(d.trimmed_mean_trim(), Some(1));
    }

    #[test]
    fn config_validation() {
        assert!(ArcpConfig::new(5, 0).is_err());
        assert!(ArcpConfig::new(4, 2).is_err());
        assert!(ArcpConfig::new(5, 2).is_ok());
    }
}
