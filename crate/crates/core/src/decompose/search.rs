//! Numerical search for a mixing isometry that makes every transformed Kraus
//! operator rank one.
//!
//! The objective is `J(V) = Σ_μ ‖N_μ (I - w_μ w_μ†)‖²`, with `w_μ` the leading
//! right singular vector of `N_μ`; this equals the sum of squared trailing
//! singular values but stays accurate far below `‖N_μ‖² · ε`.
//! `V` moves along `exp(G) V` for anti-Hermitian `G`: gradient descent with
//! Barzilai-Borwein steps until the basin of a zero is reached, then
//! Levenberg-Marquardt on the residual vector, both with central differences.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{verify_decomposition, DecompositionReport, ProductTerm, SeparableDecomposition};
use crate::duality::{mix_ops, orthonormalize_columns, spectral_kraus, term_reductions, transform, KrausSet, MixingMatrix};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, CMatrix};
use crate::scalar::Complex;
use crate::states::DensityMatrix;

pub const DEFAULT_RESTARTS: usize = 64;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 3000;
pub const VERIFY_TOL: f64 = 1e-8;

const FD_STEP: f64 = 1e-6;
const ARMIJO: f64 = 1e-4;
const POLISHED: f64 = 1e-24;
const STAGNATION_WINDOW: usize = 100;
const STAGNATION_RATIO: f64 = 1e-4;
const REORTHONORMALIZE_EVERY: usize = 50;
const POLISH_START: f64 = 1e-6;
const POLISH_ITERS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Number of rows `d'` of the mixing matrix; defaults to `max(d, m·n)`.
    pub target_terms: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iters: usize,
    /// Worker threads; `None` reads `SEPSCOPE_THREADS`, else all cores.
    pub threads: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            target_terms: None,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            tol: DEFAULT_TOL,
            max_iters: DEFAULT_MAX_ITERS,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Found { decomposition: SeparableDecomposition<f64>, verification: DecompositionReport },
    NotFound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub outcome: SearchOutcome,
    /// Smallest objective over all restarts.
    pub residual: f64,
    pub restarts: usize,
    pub seed: u64,
    pub source_terms: usize,
    pub target_terms: usize,
    pub best_restart: usize,
    pub iterations: usize,
    pub v: MixingMatrix<f64>,
}

impl SearchReport {
    pub fn found(&self) -> bool {
        matches!(self.outcome, SearchOutcome::Found { .. })
    }

    pub fn decomposition(&self) -> Option<&SeparableDecomposition<f64>> {
        match &self.outcome {
            SearchOutcome::Found { decomposition, .. } => Some(decomposition),
            SearchOutcome::NotFound => None,
        }
    }
}

/// `SEPSCOPE_THREADS` if set to a positive integer, else the available parallelism.
pub fn search_threads() -> usize {
    std::env::var("SEPSCOPE_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// `J(V)` for the transformed set `N = V·M`.
pub fn rank_one_objective(k: &KrausSet<f64>, v: &MixingMatrix<f64>) -> Result<f64> {
    Ok(transform(k, v)?.ops().iter().map(trailing_residual).sum())
}

pub fn rank_one_search(rho: &DensityMatrix<f64>, cfg: &SearchConfig) -> Result<SearchReport> {
    let source = spectral_kraus(rho);
    let d = source.len();
    let dp = cfg.target_terms.unwrap_or(d.max(rho.dim()));
    if dp < d {
        return Err(Error::DomainError(format!("target term count {dp} is below the spectral term count {d}")));
    }
    if cfg.restarts == 0 {
        return Err(Error::DomainError("at least one restart is required".into()));
    }
    let threads = cfg.threads.unwrap_or_else(search_threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::DomainError(format!("thread pool: {e}")))?;
    let runs: Vec<Run> = pool.install(|| {
        (0..cfg.restarts)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(r as u64);
                let v0 = MixingMatrix::<f64>::random(&mut rng, dp, d).into_matrix();
                descend(source.ops(), v0, cfg.max_iters)
            })
            .collect()
    });
    let (best_restart, best) = runs
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.j.total_cmp(&b.j).then(i.cmp(j)))
        .expect("at least one restart");

    let v = MixingMatrix::from_matrix_unchecked(best.v);
    let outcome = if best.j < cfg.tol {
        let decomposition = assemble(&source, &v)?;
        let verification = verify_decomposition(rho, &decomposition, VERIFY_TOL);
        if verification.pass {
            SearchOutcome::Found { decomposition, verification }
        } else {
            SearchOutcome::NotFound
        }
    } else {
        SearchOutcome::NotFound
    };
    Ok(SearchReport {
        outcome,
        residual: best.j,
        restarts: cfg.restarts,
        seed: cfg.seed,
        source_terms: d,
        target_terms: dp,
        best_restart,
        iterations: best.iterations,
        v,
    })
}

/// Product terms from the leading eigenvectors of each term's reduced states.
fn assemble(source: &KrausSet<f64>, v: &MixingMatrix<f64>) -> Result<SeparableDecomposition<f64>> {
    let n = transform(source, v)?;
    let mut terms = Vec::new();
    for t in term_reductions(&n) {
        let a = hermitian_eig(&t.rho_a)?.vector(0);
        let b = hermitian_eig(&t.rho_b)?.vector(0);
        terms.push(ProductTerm { q: t.p, a: CMatrix::projector(&a), b: CMatrix::projector(&b) });
    }
    Ok(SeparableDecomposition::new(terms))
}

struct Run {
    j: f64,
    v: CMatrix<f64>,
    iterations: usize,
}

/// `‖N(I - ww†)‖²` with `w` the leading eigenvector of `N†N`.
fn trailing_residual(n: &CMatrix<f64>) -> f64 {
    if n.frobenius_norm_sqr() == 0.0 {
        return 0.0;
    }
    let w = hermitian_eig(&n.gram()).expect("Gram matrix is Hermitian").vector(0);
    let nw = n.mul_vec(&w);
    let mut s = 0.0;
    for i in 0..n.rows() {
        for j in 0..n.cols() {
            s += (n[(i, j)] - nw[i] * w[j].conj()).norm_sqr();
        }
    }
    s
}

/// One-parameter rotations of rows `(j, l)`: `exp(h G)` for `G = E_jl - E_lj`
/// (`imaginary = false`) or `G = i(E_jl + E_lj)`. Row phases leave `J` unchanged
/// and are not parametrized.
#[derive(Clone, Copy)]
struct Generator {
    j: usize,
    l: usize,
    imaginary: bool,
}

impl Generator {
    fn rotate(&self, h: f64, xj: &CMatrix<f64>, xl: &CMatrix<f64>) -> (CMatrix<f64>, CMatrix<f64>) {
        let (c, s) = (h.cos(), h.sin());
        let (a, b) = if self.imaginary { (Complex::new(0.0, s), Complex::new(0.0, s)) } else { (Complex::new(s, 0.0), Complex::new(-s, 0.0)) };
        let cc = Complex::new(c, 0.0);
        let nj = CMatrix::from_fn(xj.rows(), xj.cols(), |r, q| cc * xj[(r, q)] + a * xl[(r, q)]);
        let nl = CMatrix::from_fn(xj.rows(), xj.cols(), |r, q| b * xj[(r, q)] + cc * xl[(r, q)]);
        (nj, nl)
    }

    fn matrix(&self, dp: usize, coef: f64) -> CMatrix<f64> {
        let mut g = CMatrix::zeros(dp, dp);
        if self.imaginary {
            g[(self.j, self.l)] = Complex::new(0.0, coef);
            g[(self.l, self.j)] = Complex::new(0.0, coef);
        } else {
            g[(self.j, self.l)] = Complex::new(coef, 0.0);
            g[(self.l, self.j)] = Complex::new(-coef, 0.0);
        }
        g
    }
}

fn generators(dp: usize) -> Vec<Generator> {
    let mut out = Vec::with_capacity(dp * (dp - 1));
    for j in 0..dp {
        for l in j + 1..dp {
            out.push(Generator { j, l, imaginary: false });
            out.push(Generator { j, l, imaginary: true });
        }
    }
    out
}

/// Central-difference gradient; each probe only touches two rows of `N`.
fn gradient(gens: &[Generator], ns: &[CMatrix<f64>]) -> Vec<f64> {
    gens.iter()
        .map(|g| {
            let (pj, pl) = g.rotate(FD_STEP, &ns[g.j], &ns[g.l]);
            let (mj, ml) = g.rotate(-FD_STEP, &ns[g.j], &ns[g.l]);
            let plus = trailing_residual(&pj) + trailing_residual(&pl);
            let minus = trailing_residual(&mj) + trailing_residual(&ml);
            (plus - minus) / (2.0 * FD_STEP)
        })
        .collect()
}

/// `exp(G)` for anti-Hermitian `G`, through the eigendecomposition of `iG`.
fn exp_anti_hermitian(g: &CMatrix<f64>) -> CMatrix<f64> {
    let h = g.scale(Complex::new(0.0, 1.0));
    let spec = hermitian_eig(&h).expect("iG is Hermitian");
    let n = spec.values.len();
    let scaled = CMatrix::from_fn(n, n, |i, j| spec.vectors[(i, j)] * Complex::from_polar(1.0, -spec.values[j]));
    scaled.matmul(&spec.vectors.adjoint())
}

fn objective(ns: &[CMatrix<f64>]) -> f64 {
    ns.iter().map(trailing_residual).sum()
}

fn descend(ops: &[CMatrix<f64>], mut v: CMatrix<f64>, max_iters: usize) -> Run {
    let dp = v.rows();
    let gens = generators(dp);
    let mut ns = mix_ops(ops, &v);
    let mut j = objective(&ns);
    if gens.is_empty() {
        return Run { j, v, iterations: 0 };
    }
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut window_start = j;
    let mut iterations = 0;
    while iterations < max_iters && j > POLISH_START {
        iterations += 1;
        let g = gradient(&gens, &ns);
        let gg: f64 = g.iter().map(|x| x * x).sum();
        if gg == 0.0 {
            break;
        }
        let mut t = match &prev {
            Some((s, g_old)) => {
                let y: Vec<f64> = g.iter().zip(g_old).map(|(a, b)| a - b).collect();
                let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
                let ss: f64 = s.iter().map(|x| x * x).sum();
                if sy > 0.0 { ss / sy } else { 1.0 }
            }
            None => (0.1 / gg.sqrt()).min(1.0),
        };
        let mut accepted = None;
        for _ in 0..60 {
            let gm = gens
                .iter()
                .zip(&g)
                .fold(CMatrix::zeros(dp, dp), |acc, (gen, &gk)| &acc + &gen.matrix(dp, -t * gk));
            let cand = exp_anti_hermitian(&gm).matmul(&v);
            let cand_ns = mix_ops(ops, &cand);
            let cj = objective(&cand_ns);
            if cj <= j - ARMIJO * t * gg {
                accepted = Some((cand, cand_ns, cj));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, cand_ns, cj)) = accepted else {
            break;
        };
        prev = Some((g.iter().map(|x| -t * x).collect(), g));
        v = cand;
        ns = cand_ns;
        j = cj;
        if iterations % REORTHONORMALIZE_EVERY == 0 {
            if let Some(q) = orthonormalize_columns(&v) {
                v = q;
                ns = mix_ops(ops, &v);
                j = objective(&ns);
            }
        }
        if iterations % STAGNATION_WINDOW == 0 {
            if j > window_start * (1.0 - STAGNATION_RATIO) {
                break;
            }
            window_start = j;
        }
    }
    if j <= POLISH_START && j > POLISHED {
        let budget = POLISH_ITERS.min(max_iters.saturating_sub(iterations).max(POLISH_ITERS / 4));
        let (pv, pj, used) = polish(ops, &gens, v, budget);
        v = pv;
        j = pj;
        iterations += used;
    }
    Run { j, v, iterations }
}

/// Real and imaginary parts of `N(I - ww†)`.
fn residual_vector(n: &CMatrix<f64>) -> Vec<f64> {
    let (rows, cols) = n.shape();
    if n.frobenius_norm_sqr() == 0.0 {
        return vec![0.0; 2 * rows * cols];
    }
    let w = hermitian_eig(&n.gram()).expect("Gram matrix is Hermitian").vector(0);
    let nw = n.mul_vec(&w);
    let mut out = Vec::with_capacity(2 * rows * cols);
    for i in 0..rows {
        for k in 0..cols {
            let z = n[(i, k)] - nw[i] * w[k].conj();
            out.push(z.re);
            out.push(z.im);
        }
    }
    out
}

/// Solves `(A + λI) x = b` for symmetric positive semidefinite `A`.
fn damped_solve(a: &[Vec<f64>], b: &[f64], lambda: f64) -> Vec<f64> {
    let n = b.len();
    let m = CMatrix::from_fn(n, n, |i, j| Complex::new(a[i][j], 0.0));
    let spec = hermitian_eig(&m).expect("normal matrix is symmetric");
    let mut x = vec![0.0; n];
    for k in 0..n {
        let u = spec.vector(k);
        let coef = u.iter().zip(b).map(|(ui, bi)| ui.conj() * bi).sum::<Complex<f64>>() / (spec.values[k].max(0.0) + lambda);
        for (xi, ui) in x.iter_mut().zip(&u) {
            *xi += (ui * coef).re;
        }
    }
    x
}

fn polish(ops: &[CMatrix<f64>], gens: &[Generator], mut v: CMatrix<f64>, budget: usize) -> (CMatrix<f64>, f64, usize) {
    let dp = v.rows();
    let mut ns = mix_ops(ops, &v);
    let mut res: Vec<Vec<f64>> = ns.iter().map(residual_vector).collect();
    let mut j = objective(&ns);
    let np = gens.len();
    let mut lambda = 0.0;
    let mut used = 0;
    while used < budget && j > POLISHED {
        used += 1;
        // Jacobian columns are nonzero only on the two row blocks a generator touches.
        let cols: Vec<(Vec<f64>, Vec<f64>)> = gens
            .iter()
            .map(|g| {
                let (pj, pl) = g.rotate(FD_STEP, &ns[g.j], &ns[g.l]);
                let (mj, ml) = g.rotate(-FD_STEP, &ns[g.j], &ns[g.l]);
                let diff = |p: &CMatrix<f64>, m: &CMatrix<f64>| -> Vec<f64> {
                    residual_vector(p).iter().zip(residual_vector(m)).map(|(x, y)| (x - y) / (2.0 * FD_STEP)).collect()
                };
                (diff(&pj, &mj), diff(&pl, &ml))
            })
            .collect();
        let dot_blocks = |a: usize, b: usize| -> f64 {
            let (ga, gb) = (gens[a], gens[b]);
            let mut s = 0.0;
            for (ra, ca) in [(ga.j, &cols[a].0), (ga.l, &cols[a].1)] {
                for (rb, cb) in [(gb.j, &cols[b].0), (gb.l, &cols[b].1)] {
                    if ra == rb {
                        s += ca.iter().zip(cb).map(|(x, y)| x * y).sum::<f64>();
                    }
                }
            }
            s
        };
        let normal: Vec<Vec<f64>> = (0..np).map(|a| (0..np).map(|b| dot_blocks(a, b)).collect()).collect();
        let grad: Vec<f64> = (0..np)
            .map(|a| {
                let g = gens[a];
                let s: f64 = cols[a].0.iter().zip(&res[g.j]).map(|(x, y)| x * y).sum();
                s + cols[a].1.iter().zip(&res[g.l]).map(|(x, y)| x * y).sum::<f64>()
            })
            .collect();
        if lambda == 0.0 {
            lambda = 1e-3 * (0..np).map(|a| normal[a][a]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        }
        let mut improved = false;
        for _ in 0..30 {
            let neg: Vec<f64> = grad.iter().map(|x| -x).collect();
            let delta = damped_solve(&normal, &neg, lambda);
            let gm = gens.iter().zip(&delta).fold(CMatrix::zeros(dp, dp), |acc, (gen, &dk)| &acc + &gen.matrix(dp, dk));
            let cand = exp_anti_hermitian(&gm).matmul(&v);
            let cand_ns = mix_ops(ops, &cand);
            let cj = objective(&cand_ns);
            if cj < j {
                v = cand;
                ns = cand_ns;
                j = cj;
                lambda = (lambda / 3.0).max(1e-30);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
        res = ns.iter().map(residual_vector).collect();
    }
    if let Some(q) = orthonormalize_columns(&v) {
        let qj = objective(&mix_ops(ops, &q));
        if qj <= j {
            return (q, qj, used);
        }
    }
    (v, j, used)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{named_state, NamedState};

    #[test]
    fn exp_is_unitary() {
        let gens = generators(3);
        let g = gens.iter().enumerate().fold(CMatrix::zeros(3, 3), |acc, (k, gen)| &acc + &gen.matrix(3, 0.1 * k as f64 - 0.2));
        let u = exp_anti_hermitian(&g);
        assert!(u.gram().max_abs_diff(&CMatrix::identity(3)) < 1e-13);
    }

    #[test]
    fn generator_rotation_matches_exponential() {
        let ops = vec![CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.5]]), CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.3, 0.0]])];
        let v = CMatrix::<f64>::identity(2);
        let ns = mix_ops(&ops, &v);
        for gen in generators(2) {
            let (a, b) = gen.rotate(0.37, &ns[0], &ns[1]);
            let direct = mix_ops(&ops, &exp_anti_hermitian(&gen.matrix(2, 0.37)).matmul(&v));
            assert!(a.max_abs_diff(&direct[0]) < 1e-13);
            assert!(b.max_abs_diff(&direct[1]) < 1e-13);
        }
    }

    #[test]
    fn residual_of_rank_one_is_tiny() {
        let x = [Complex::new(0.6, 0.1), Complex::new(-0.2, 0.7)];
        let y = [Complex::new(1.0, 0.0), Complex::new(0.0, -2.0)];
        assert!(trailing_residual(&CMatrix::outer(&x, &y)) < 1e-28);
        assert!((trailing_residual(&CMatrix::identity(2)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn equal_bell_mixture_is_found() {
        let rho = named_state::<f64>(&NamedState::BellMixture { p: 0.5 }).unwrap().state;
        let cfg = SearchConfig { target_terms: Some(2), restarts: 4, seed: 7, threads: Some(1), ..Default::default() };
        let r = rank_one_search(&rho, &cfg).unwrap();
        assert!(r.found(), "residual {}", r.residual);
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn too_few_targets_is_domain_error() {
        let rho = DensityMatrix::<f64>::maximally_mixed(2, 2);
        let cfg = SearchConfig { target_terms: Some(3), ..Default::default() };
        assert!(matches!(rank_one_search(&rho, &cfg), Err(Error::DomainError(_))));
    }
}
