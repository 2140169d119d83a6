//! Graded pieces of the Jacobian ideal and Milnor algebra dimensions.
//!
//! For a homogeneous f of degree N with Jacobian ideal J_f = (f_x, f_y, f_z),
//! the degree-r piece of J_f is the image of the multiplication map
//! (S_{r-N+1})^3 -> S_r sending (a, b, c) to a f_x + b f_y + c f_z. Its rank
//! gives dim M(f)_r = dim S_r - rank, the Hilbert function of the graded
//! Milnor algebra M(f) = S / J_f. No Groebner machinery is needed: only
//! finitely many degrees matter and each is a single rank computation.
//!
//! For a reduced curve the Hilbert function eventually settles at the global
//! Tjurina number; the profile detects that plateau with a trailing-window
//! heuristic since the settling degree is not known a priori.

use crate::linalg::{
    rank_certified_with_primes, rank_exact, rank_modular, sample_primes, IntMatrix, LinalgError,
};
use crate::poly::{Monomial, Polynomial};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GradedError {
    #[error("polynomial is zero or not homogeneous")]
    ZeroOrInhomogeneous,
    #[error("degree {0} is below 2; the curve theory needs a reduced curve of degree >= 2")]
    DegreeTooSmall(u32),
    #[error("stabilization window must be at least 2, got {0}")]
    WindowTooSmall(usize),
    #[error("no stabilization within degree {r_max}; raise the maximum degree")]
    NoStabilization { r_max: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// dim S_r = C(r+2, 2) for r >= 0, and 0 for negative r.
pub fn dim_s(r: i64) -> usize {
    if r < 0 {
        0
    } else {
        let r = r as usize;
        (r + 2) * (r + 1) / 2
    }
}

/// All monomials of total degree `r` in descending grevlex order.
pub fn monomial_basis(r: u32) -> Vec<Monomial> {
    let mut basis = Vec::with_capacity(dim_s(r as i64));
    for a in 0..=r {
        for b in 0..=r - a {
            basis.push(Monomial::new(a, b, r - a - b));
        }
    }
    basis.sort_by(|m1, m2| m2.cmp(m1));
    basis
}

/// The degree-r multiplication matrix of the Jacobian generators.
///
/// Rows are indexed by the degree-r monomial basis (descending grevlex),
/// columns by (generator, source monomial) pairs with the f_x block first and
/// source monomials in descending grevlex within each block.
#[derive(Debug, Clone)]
pub struct GradedMap {
    pub n: u32,
    pub target_degree: u32,
    pub matrix: IntMatrix,
}

/// Checks the degree contract shared by all Milnor algebra entry points and
/// returns (integer-rescaled f, N).
fn checked_input(f: &Polynomial) -> Result<(Polynomial, u32), GradedError> {
    let n = f
        .homogeneous_degree()
        .ok_or(GradedError::ZeroOrInhomogeneous)?;
    if n < 2 {
        return Err(GradedError::DegreeTooSmall(n));
    }
    // Rescaling f clears denominators without changing the Jacobian ideal.
    let mut lcm = BigInt::one();
    for (_, c) in f.terms() {
        lcm = lcm.lcm(c.denom());
    }
    let scaled = if lcm.is_one() {
        f.clone()
    } else {
        &Polynomial::constant(num_rational::BigRational::from_integer(lcm)) * f
    };
    Ok((scaled, n))
}

pub fn build_graded_map(f: &Polynomial, r: u32) -> Result<GradedMap, GradedError> {
    let (f, n) = checked_input(f)?;
    let rows_basis = monomial_basis(r);
    let row_of: HashMap<Monomial, usize> = rows_basis
        .iter()
        .enumerate()
        .map(|(i, m)| (*m, i))
        .collect();
    let source_degree = r as i64 - n as i64 + 1;
    let cols = 3 * dim_s(source_degree);
    let mut matrix = IntMatrix::zero(rows_basis.len(), cols);
    if cols > 0 {
        let source_basis = monomial_basis(source_degree as u32);
        let partials = f.partial_derivatives();
        for (block, partial) in partials.iter().enumerate() {
            for (j, m) in source_basis.iter().enumerate() {
                let col = block * source_basis.len() + j;
                for (mono, coeff) in partial.terms() {
                    debug_assert!(coeff.denom().is_one());
                    let row = row_of[&m.mul(mono)];
                    *matrix.at_mut(row, col) = coeff.numer().clone();
                }
            }
        }
    }
    Ok(GradedMap {
        n,
        target_degree: r,
        matrix,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMode {
    Exact,
    Modular,
    Certified,
}

#[derive(Debug, Clone)]
pub struct RankConfig {
    pub mode: RankMode,
    /// Number of distinct primes sampled in certified mode.
    pub prime_count: usize,
    /// Base seed for prime sampling; `None` draws one from the OS.
    pub seed: Option<u64>,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            mode: RankMode::Certified,
            prime_count: 3,
            seed: None,
        }
    }
}

impl RankConfig {
    pub fn exact() -> Self {
        RankConfig {
            mode: RankMode::Exact,
            ..Default::default()
        }
    }

    pub fn certified_seeded(seed: u64) -> Self {
        RankConfig {
            seed: Some(seed),
            ..Default::default()
        }
    }

    fn base_seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| rand::thread_rng().gen())
    }

    /// Independent stream per degree so profiles can run in parallel and
    /// still be reproducible under a fixed seed.
    fn rng_for_degree(&self, base: u64, r: u32) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(base ^ (r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MilnorDim {
    pub dim: usize,
    /// True when certified mode saw modular disagreement and re-ran exactly.
    pub fell_back: bool,
}

fn rank_with(matrix: &IntMatrix, cfg: &RankConfig, rng: &mut ChaCha8Rng) -> Result<(usize, bool), GradedError> {
    match cfg.mode {
        RankMode::Exact => Ok((rank_exact(matrix), false)),
        RankMode::Modular => {
            let p = sample_primes(rng, 1)[0];
            Ok((rank_modular(matrix, p)?, false))
        }
        RankMode::Certified => {
            let primes = sample_primes(rng, cfg.prime_count.max(1));
            let out = rank_certified_with_primes(matrix, &primes)?;
            Ok((out.rank, out.fell_back))
        }
    }
}

pub fn milnor_dim(f: &Polynomial, r: u32, cfg: &RankConfig) -> Result<MilnorDim, GradedError> {
    let map = build_graded_map(f, r)?;
    let mut rng = cfg.rng_for_degree(cfg.base_seed(), r);
    let (rank, fell_back) = rank_with(&map.matrix, cfg, &mut rng)?;
    Ok(MilnorDim {
        dim: dim_s(r as i64) - rank,
        fell_back,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stabilization {
    /// The plateau value; the global Tjurina number candidate.
    pub value: usize,
    /// First degree from which every computed dimension equals the value.
    pub onset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MilnorProfile {
    pub n: u32,
    /// dims[r] = dim M(f)_r for r = 0..=r_max.
    pub dims: Vec<usize>,
    pub window: usize,
    pub stabilized: Option<Stabilization>,
    /// Degrees where certified mode fell back to exact elimination.
    pub fallback_degrees: Vec<usize>,
}

impl MilnorProfile {
    pub fn r_max(&self) -> usize {
        self.dims.len() - 1
    }

    /// dim M(f)_{2N-3}, the degree the filtration comparison reads.
    pub fn dim_at_2n_minus_3(&self) -> Option<usize> {
        self.dims.get(2 * self.n as usize - 3).copied()
    }
}

pub fn default_r_max(n: u32, window: usize) -> usize {
    let a = 2 * n as usize - 3;
    let b = (3 * n as usize).saturating_sub(6);
    a.max(b) + window
}

#[derive(Debug, Clone)]
pub struct ProfileConfig {
    pub rank: RankConfig,
    /// Highest degree to compute; `None` uses `default_r_max`.
    pub r_max: Option<usize>,
    /// Trailing run length that counts as a plateau.
    pub window: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            rank: RankConfig::default(),
            r_max: None,
            window: 3,
        }
    }
}

pub fn milnor_profile(f: &Polynomial, cfg: &ProfileConfig) -> Result<MilnorProfile, GradedError> {
    if cfg.window < 2 {
        return Err(GradedError::WindowTooSmall(cfg.window));
    }
    let (f, n) = checked_input(f)?;
    let r_max = cfg.r_max.unwrap_or_else(|| default_r_max(n, cfg.window));
    let base_seed = cfg.rank.base_seed();
    // Degrees below N-1 have an empty source: dim M(f)_r = dim S_r.
    let first_active = (n - 1) as usize;
    let mut dims = vec![0usize; r_max + 1];
    for (r, d) in dims.iter_mut().enumerate().take(first_active.min(r_max + 1)) {
        *d = dim_s(r as i64);
    }
    let computed: Result<Vec<(usize, MilnorDim)>, GradedError> = (first_active..=r_max)
        .into_par_iter()
        .map(|r| {
            let map = build_graded_map(&f, r as u32)?;
            let mut rng = cfg.rank.rng_for_degree(base_seed, r as u32);
            let (rank, fell_back) = rank_with(&map.matrix, &cfg.rank, &mut rng)?;
            Ok((
                r,
                MilnorDim {
                    dim: dim_s(r as i64) - rank,
                    fell_back,
                },
            ))
        })
        .collect();
    let mut fallback_degrees = Vec::new();
    for (r, d) in computed? {
        dims[r] = d.dim;
        if d.fell_back {
            fallback_degrees.push(r);
        }
    }
    let stabilized = detect_plateau(&dims, cfg.window);
    Ok(MilnorProfile {
        n,
        dims,
        window: cfg.window,
        stabilized,
        fallback_degrees,
    })
}

fn detect_plateau(dims: &[usize], window: usize) -> Option<Stabilization> {
    if dims.len() < window {
        return None;
    }
    let value = *dims.last().unwrap();
    let tail = &dims[dims.len() - window..];
    if !tail.iter().all(|&d| d == value) {
        return None;
    }
    let onset = (0..dims.len())
        .rev()
        .take_while(|&i| dims[i] == value)
        .last()
        .unwrap();
    Some(Stabilization { value, onset })
}

/// The plateau value of a profile: the global Tjurina number when the
/// profile really has settled.
pub fn tjurina_from_profile(profile: &MilnorProfile) -> Result<usize, GradedError> {
    profile
        .stabilized
        .as_ref()
        .map(|s| s.value)
        .ok_or(GradedError::NoStabilization {
            r_max: profile.r_max(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn fermat(n: u32) -> Polynomial {
        parse_poly(&format!("x^{n}+y^{n}+z^{n}")).unwrap()
    }

    /// Independent oracle for Fermat curves: J_f = (x^{N-1}, y^{N-1}, z^{N-1})
    /// is a monomial ideal, so dim M(f)_r counts the staircase monomials of
    /// degree r with every exponent at most N-2.
    fn staircase_dim(n: u32, r: u32) -> usize {
        monomial_basis(r)
            .iter()
            .filter(|m| m.exponents().iter().all(|&e| e <= n - 2))
            .count()
    }

    #[test]
    fn dim_s_values() {
        assert_eq!(dim_s(0), 1);
        assert_eq!(dim_s(3), 10);
        assert_eq!(dim_s(27), 406);
        assert_eq!(dim_s(-1), 0);
        assert_eq!(dim_s(-7), 0);
    }

    #[test]
    fn basis_is_descending_and_complete() {
        let basis = monomial_basis(3);
        assert_eq!(basis.len(), 10);
        assert_eq!(basis[0], Monomial::new(3, 0, 0));
        assert_eq!(basis[9], Monomial::new(0, 0, 3));
        for w in basis.windows(2) {
            assert!(w[0] > w[1]);
        }
    }

    #[test]
    fn graded_map_below_start_degree_is_empty() {
        let map = build_graded_map(&fermat(3), 2).unwrap();
        assert_eq!((map.matrix.rows(), map.matrix.cols()), (6, 0));
        assert_eq!(rank_exact(&map.matrix), 0);
    }

    #[test]
    fn graded_map_of_fermat_cubic_at_three() {
        let map = build_graded_map(&fermat(3), 3).unwrap();
        assert_eq!((map.matrix.rows(), map.matrix.cols()), (10, 3));
        assert_eq!(rank_exact(&map.matrix), 3);
        // Column 0 is x * 3x^2 = 3x^3; the top row is the x^3 slot.
        assert_eq!(map.matrix.at(0, 0), &BigInt::from(3));
    }

    #[test]
    fn graded_map_rejects_bad_input() {
        assert_eq!(
            build_graded_map(&parse_poly("x+y^2").unwrap(), 3),
            Err(GradedError::ZeroOrInhomogeneous).map_err(|e| e),
            "inhomogeneous"
        );
        assert!(matches!(
            build_graded_map(&Polynomial::zero(), 3),
            Err(GradedError::ZeroOrInhomogeneous)
        ));
        assert!(matches!(
            build_graded_map(&parse_poly("x").unwrap(), 3),
            Err(GradedError::DegreeTooSmall(1))
        ));
    }

    #[test]
    fn milnor_dims_match_staircase_for_fermat_curves() {
        let cfg = RankConfig::exact();
        for n in 3..=6u32 {
            let f = fermat(n);
            for r in 0..=(3 * n - 5) {
                let got = milnor_dim(&f, r, &cfg).unwrap().dim;
                assert_eq!(got, staircase_dim(n, r), "N={n}, r={r}");
            }
        }
    }

    #[test]
    fn fermat_cubic_profile_is_one_three_three_one() {
        let cfg = ProfileConfig {
            rank: RankConfig::exact(),
            r_max: Some(6),
            window: 3,
        };
        let profile = milnor_profile(&fermat(3), &cfg).unwrap();
        assert_eq!(profile.dims, vec![1, 3, 3, 1, 0, 0, 0]);
        assert_eq!(
            profile.stabilized,
            Some(Stabilization { value: 0, onset: 4 })
        );
        assert_eq!(tjurina_from_profile(&profile).unwrap(), 0);
    }

    #[test]
    fn nodal_cubic_stabilizes_at_one() {
        let f = parse_poly("z*y^2-x^2*(x+z)").unwrap();
        let profile = milnor_profile(
            &f,
            &ProfileConfig {
                rank: RankConfig::exact(),
                r_max: Some(6),
                window: 3,
            },
        )
        .unwrap();
        assert_eq!(tjurina_from_profile(&profile).unwrap(), 1);
        assert!(profile.stabilized.as_ref().unwrap().onset <= 6);
        assert_eq!(profile.dim_at_2n_minus_3(), Some(1));
    }

    #[test]
    fn dims_equal_full_space_below_jacobian_degrees() {
        let f = parse_poly("x^2*y^2+y^2*z^2+z^2*x^2-2*x*y*z*(x+y+z)").unwrap();
        let profile = milnor_profile(
            &f,
            &ProfileConfig {
                rank: RankConfig::exact(),
                ..Default::default()
            },
        )
        .unwrap();
        for r in 0..=2usize {
            assert_eq!(profile.dims[r], dim_s(r as i64));
        }
    }

    #[test]
    fn no_stabilization_is_reported() {
        let profile = milnor_profile(
            &fermat(4),
            &ProfileConfig {
                rank: RankConfig::exact(),
                r_max: Some(4),
                window: 3,
            },
        )
        .unwrap();
        // dims = 1, 3, 6, 7, 6 at r_max = 4: still moving.
        assert_eq!(profile.stabilized, None);
        assert_eq!(
            tjurina_from_profile(&profile),
            Err(GradedError::NoStabilization { r_max: 4 })
        );
    }

    #[test]
    fn window_below_two_is_rejected() {
        let out = milnor_profile(
            &fermat(3),
            &ProfileConfig {
                rank: RankConfig::exact(),
                r_max: Some(5),
                window: 1,
            },
        );
        assert!(matches!(out, Err(GradedError::WindowTooSmall(1))));
    }

    #[test]
    fn certified_matches_exact_on_small_corpus() {
        for text in ["x^3+y^3+z^3", "z*y^2-x^2*(x+z)", "y^2*z-x^3"] {
            let f = parse_poly(text).unwrap();
            let exact = milnor_profile(
                &f,
                &ProfileConfig {
                    rank: RankConfig::exact(),
                    ..Default::default()
                },
            )
            .unwrap();
            let certified = milnor_profile(
                &f,
                &ProfileConfig {
                    rank: RankConfig::certified_seeded(99),
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(exact.dims, certified.dims, "{}", text);
        }
    }

    #[test]
    fn rational_coefficients_are_cleared() {
        // (1/2) x^3 + y^3 + z^3 has the same Jacobian ideal shape as Fermat.
        let half = parse_poly("x^3").unwrap();
        let half = &Polynomial::constant(num_rational::BigRational::new(
            BigInt::from(1),
            BigInt::from(2),
        )) * &half;
        let f = &half + &parse_poly("y^3+z^3").unwrap();
        let d = milnor_dim(&f, 3, &RankConfig::exact()).unwrap().dim;
        assert_eq!(d, 1);
    }

    #[test]
    fn default_r_max_formula() {
        assert_eq!(default_r_max(2, 3), 4);
        assert_eq!(default_r_max(3, 3), 6);
        assert_eq!(default_r_max(15, 3), 42);
    }
}
