//! Recursive-filter coefficient fitting.
//!
//! Coefficients are found by minimizing the mean-square error between the
//! recursive filter's impulse response and a target half-kernel over lags
//! `0 … K`, using Nelder-Mead with seeded random restarts. Candidates whose
//! feedback polynomial has roots on or outside the unit circle are pushed
//! away with a large penalty and never returned.
//!
//! The zero-frequency gain is handled as an exact constraint rather than
//! left to the objective: `b_0` is solved from the remaining coefficients
//! so the filter's DC response equals the target's. A mean-square error of
//! ε over K lags tolerates a DC error of order `K·√ε`, and projection rows
//! have a mean that is orders of magnitude above their filtered values, so
//! even a tiny unconstrained DC mismatch dominates every reconstruction.
//! The constraint costs nothing measurable in the achieved error.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::filters::{iir_impulse_response, IirFilterPair};
use crate::scalar::{cast, Scalar};

/// Optimizer settings for [`fit_iir`].
#[derive(Debug, Clone)]
pub struct FitOptions<T: Scalar = f64> {
    /// Independent Nelder-Mead starts; the best stable result wins.
    pub restarts: usize,
    /// Edge length of the initial simplex around each start.
    pub simplex_scale: f64,
    /// Converged when the simplex diameter falls below this.
    pub diameter_tol: f64,
    /// Objective evaluation budget per restart.
    pub max_evals: usize,
    /// Seed for the restart perturbations; fixed seed, fixed result.
    pub seed: u64,
    /// Optional warm start, e.g. a lower-order solution padded with zeros.
    pub initial: Option<IirFilterPair<T>>,
}

impl<T: Scalar> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            restarts: 8,
            simplex_scale: 0.1,
            diameter_tol: 1e-10,
            max_evals: 20_000,
            seed: 0,
            initial: None,
        }
    }
}

/// Outcome of a fit: achieved mean-square impulse-response error, evaluation
/// count of the winning restart, convergence flag and the fit horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport<T: Scalar = f64> {
    pub mse: T,
    pub iterations: usize,
    pub converged: bool,
    pub horizon: usize,
}

const STABILITY_PENALTY: f64 = 1e6;
const STABILITY_MARGIN: f64 = 1e-9;

/// Largest root magnitude of `z^Q + a_1·z^{Q-1} + … + a_Q`. Returns 0 for
/// an empty coefficient list.
pub(crate) fn feedback_spectral_radius<T: Scalar>(a: &[T]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let coeffs: Vec<f64> = a.iter().map(|v| v.to_f64().unwrap()).collect();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return f64::INFINITY;
    }
    polynomial_roots(&coeffs)
        .iter()
        .map(|r| r.0.hypot(r.1))
        .fold(0.0f64, f64::max)
}

/// Roots of the monic polynomial `z^q + c_0·z^{q-1} + … + c_{q-1}` via
/// Durand-Kerner iteration.
fn polynomial_roots(coeffs: &[f64]) -> Vec<(f64, f64)> {
    let q = coeffs.len();
    let eval = |z: (f64, f64)| -> (f64, f64) {
        let mut re = 1.0;
        let mut im = 0.0;
        for &c in &coeffs {
            let nre = re * z.0 - im * z.1 + c;
            let nim = re * z.1 + im * z.0;
            re = nre;
            im = nim;
        }
        (re, im)
    };
    // Radius bound keeps the initial guesses outside the root set.
    let bound = 1.0 + coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut roots: Vec<(f64, f64)> = (0..q)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / q as f64;
            (0.7 * bound * ang.cos(), 0.7 * bound * ang.sin())
        })
        .collect();
    for _ in 0..200 {
        let mut shift = 0.0f64;
        for i in 0..q {
            let (pre, pim) = eval(roots[i]);
            // Divide by the product of differences to the other iterates.
            let mut dre = 1.0;
            let mut dim = 0.0;
            for j in 0..q {
                if i != j {
                    let er = roots[i].0 - roots[j].0;
                    let ei = roots[i].1 - roots[j].1;
                    let nre = dre * er - dim * ei;
                    let nim = dre * ei + dim * er;
                    dre = nre;
                    dim = nim;
                }
            }
            let denom = dre * dre + dim * dim;
            if denom < 1e-300 {
                continue;
            }
            let cre = (pre * dre + pim * dim) / denom;
            let cim = (pim * dre - pre * dim) / denom;
            roots[i].0 -= cre;
            roots[i].1 -= cim;
            shift = shift.max(cre.hypot(cim));
        }
        if shift < 1e-13 {
            break;
        }
    }
    roots
}

/// Expand the reduced parameter vector `[b_1…b_{M−1}, a_1…a_Q]` into full
/// coefficient lists, solving `b_0` so the causal DC gain `B(1)/A(1)`
/// equals the target's sum.
fn expand_params<T: Scalar>(params: &[f64], m: usize, dc: f64) -> (Vec<T>, Vec<T>) {
    let tail_b = &params[..m - 1];
    let a = &params[m - 1..];
    let a_at_one: f64 = 1.0 + a.iter().sum::<f64>();
    let b0 = dc * a_at_one - tail_b.iter().sum::<f64>();
    let b: Vec<T> = std::iter::once(b0)
        .chain(tail_b.iter().copied())
        .map(cast::<T>)
        .collect();
    (b, a.iter().map(|&v| cast::<T>(v)).collect())
}

/// Solve a small dense least-squares problem `rows·x ≈ rhs` via normal
/// equations with partial pivoting. Returns `None` on (near-)singularity.
fn solve_least_squares(rows: &[Vec<f64>], rhs: &[f64], dim: usize) -> Option<Vec<f64>> {
    let mut ata = vec![0.0f64; dim * dim];
    let mut atb = vec![0.0f64; dim];
    for (row, &b) in rows.iter().zip(rhs) {
        for i in 0..dim {
            atb[i] += row[i] * b;
            for j in 0..dim {
                ata[i * dim + j] += row[i] * row[j];
            }
        }
    }
    // Tiny ridge keeps borderline-rank systems solvable; the result is only
    // an optimizer seed.
    let trace: f64 = (0..dim).map(|i| ata[i * dim + i]).sum();
    let ridge = 1e-12 * (trace / dim as f64).max(1e-300);
    for i in 0..dim {
        ata[i * dim + i] += ridge;
    }
    for col in 0..dim {
        let pivot = (col..dim)
            .max_by(|&a, &b| {
                ata[a * dim + col]
                    .abs()
                    .partial_cmp(&ata[b * dim + col].abs())
                    .unwrap()
            })
            .unwrap();
        if ata[pivot * dim + col].abs() < 1e-14 * (1.0 + trace) {
            return None;
        }
        if pivot != col {
            for j in 0..dim {
                ata.swap(col * dim + j, pivot * dim + j);
            }
            atb.swap(col, pivot);
        }
        for r in col + 1..dim {
            let factor = ata[r * dim + col] / ata[col * dim + col];
            for j in col..dim {
                ata[r * dim + j] -= factor * ata[col * dim + j];
            }
            atb[r] -= factor * atb[col];
        }
    }
    let mut x = vec![0.0f64; dim];
    for i in (0..dim).rev() {
        let mut acc = atb[i];
        for j in i + 1..dim {
            acc -= ata[i * dim + j] * x[j];
        }
        x[i] = acc / ata[i * dim + i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Rebuild a monic polynomial's coefficients `c_1…c_q` (of
/// `z^q + c_1·z^{q-1} + … + c_q`) from its roots.
fn poly_from_roots(roots: &[(f64, f64)]) -> Vec<f64> {
    let mut coeffs: Vec<(f64, f64)> = vec![(1.0, 0.0)];
    for &(re, im) in roots {
        let mut next = vec![(0.0, 0.0); coeffs.len() + 1];
        for (i, &(cre, cim)) in coeffs.iter().enumerate() {
            next[i].0 += cre;
            next[i].1 += cim;
            next[i + 1].0 -= cre * re - cim * im;
            next[i + 1].1 -= cre * im + cim * re;
        }
        coeffs = next;
    }
    coeffs.iter().skip(1).map(|c| c.0).collect()
}

/// Linear-prediction initialization: poles from the recursion the target
/// tail must satisfy, zeros by forward substitution, unstable poles shrunk
/// back inside the unit circle. Returns reduced parameters, or `None` when
/// the system is degenerate.
fn prony_init<T: Scalar>(target: &[T], m: usize, q: usize) -> Option<Vec<f64>> {
    let t: Vec<f64> = target.iter().map(|v| v.to_f64().unwrap()).collect();
    let k = t.len() - 1;
    let mut a = vec![0.0f64; q];
    if q > 0 {
        if k < m + q {
            return None;
        }
        let mut rows = Vec::with_capacity(k + 1 - m);
        let mut rhs = Vec::with_capacity(k + 1 - m);
        for n in m..=k {
            rows.push((1..=q).map(|j| t[n - j]).collect::<Vec<f64>>());
            rhs.push(-t[n]);
        }
        a = solve_least_squares(&rows, &rhs, q)?;
        if feedback_spectral_radius(&a) >= 1.0 - STABILITY_MARGIN {
            let coeffs: Vec<f64> = a.clone();
            let roots = polynomial_roots(&coeffs);
            let shrunk: Vec<(f64, f64)> = roots
                .iter()
                .map(|&(re, im)| {
                    let mag = re.hypot(im);
                    if mag >= 1.0 - 1e-6 {
                        let scale = (1.0 - 1e-4) / mag;
                        (re * scale, im * scale)
                    } else {
                        (re, im)
                    }
                })
                .collect();
            a = poly_from_roots(&shrunk);
        }
    }
    let mut reduced = Vec::with_capacity(m - 1 + q);
    for n in 1..m {
        let mut b = t[n];
        for j in 1..=q.min(n) {
            b += a[j - 1] * t[n - j];
        }
        reduced.push(b);
    }
    reduced.extend_from_slice(&a);
    reduced.iter().all(|v| v.is_finite()).then_some(reduced)
}

fn objective<T: Scalar>(params: &[f64], m: usize, dc: f64, target: &[T]) -> f64 {
    let (b, a) = expand_params::<T>(params, m, dc);
    let radius = feedback_spectral_radius(&a);
    let mut penalty = 0.0;
    if radius >= 1.0 - STABILITY_MARGIN {
        penalty = STABILITY_PENALTY * (radius - (1.0 - STABILITY_MARGIN)).max(0.0).min(1e3);
        if radius >= 1.0 {
            // An unstable recursion overflows on long horizons; score the
            // penalty alone instead of running it.
            return STABILITY_PENALTY + penalty;
        }
    }
    let filter = match IirFilterPair::new(b, a) {
        Ok(f) => f,
        Err(_) => return f64::INFINITY,
    };
    let response = iir_impulse_response(&filter, target.len() - 1);
    let mut sum = 0.0;
    for (r, t) in response.iter().zip(target) {
        let d = r.to_f64().unwrap() - t.to_f64().unwrap();
        sum += d * d;
    }
    if !sum.is_finite() {
        return STABILITY_PENALTY;
    }
    sum / target.len() as f64 + penalty
}

struct NelderMeadOutcome {
    best: Vec<f64>,
    value: f64,
    evals: usize,
    converged: bool,
}

/// Standard Nelder-Mead with reflection 1, expansion 2, contraction 0.5 and
/// shrink 0.5. Stops on simplex diameter or the evaluation budget.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    scale: f64,
    diameter_tol: f64,
    max_evals: usize,
) -> NelderMeadOutcome {
    let dim = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += scale;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

    let mut converged = false;
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let reordered: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let revalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = reordered;
        values = revalues;

        let diameter = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0f64, f64::max);
        if diameter < diameter_tol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|v| v[k]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&worst)
            .map(|(c, w)| c + (c - w))
            .collect();
        let fr = eval(&reflect, &mut evals);

        if fr < values[0] {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c + 2.0 * (c - w))
                .collect();
            let fe = eval(&expand, &mut evals);
            if fe < fr {
                simplex[dim] = expand;
                values[dim] = fe;
            } else {
                simplex[dim] = reflect;
                values[dim] = fr;
            }
        } else if fr < values[dim - 1] {
            simplex[dim] = reflect;
            values[dim] = fr;
        } else {
            let (base, fbase) = if fr < values[dim] {
                (reflect.clone(), fr)
            } else {
                (worst.clone(), values[dim])
            };
            let contract: Vec<f64> = centroid
                .iter()
                .zip(&base)
                .map(|(c, w)| c + 0.5 * (w - c))
                .collect();
            let fc = eval(&contract, &mut evals);
            if fc < fbase {
                simplex[dim] = contract;
                values[dim] = fc;
            } else {
                for i in 1..=dim {
                    let shrunk: Vec<f64> = simplex[i]
                        .iter()
                        .zip(&simplex[0])
                        .map(|(v, b)| b + 0.5 * (v - b))
                        .collect();
                    simplex[i] = shrunk;
                    values[i] = eval(&simplex[i], &mut evals);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=dim {
        if values[i] < values[best] {
            best = i;
        }
    }
    NelderMeadOutcome {
        best: simplex[best].clone(),
        value: values[best],
        evals,
        converged,
    }
}

/// Fit recursive-filter coefficients of orders `(M, Q)` to a causal target
/// sequence by impulse-response least squares.
///
/// The returned filter is always stable; if no restart produces a stable
/// candidate the fit fails. Results are deterministic for a fixed seed.
pub fn fit_iir<T: Scalar>(
    target: &[T],
    m: usize,
    q: usize,
    opts: &FitOptions<T>,
) -> Result<(IirFilterPair<T>, FitReport<T>)> {
    if m < 1 {
        return Err(Error::InvalidParameter(
            "feedforward order must be at least 1".into(),
        ));
    }
    if target.len() < m + q {
        return Err(Error::InvalidParameter(format!(
            "target length {} gives fewer constraints than the {} coefficients",
            target.len(),
            m + q
        )));
    }
    if let Some(initial) = &opts.initial {
        if initial.feedforward_order() > m || initial.feedback_order() > q {
            return Err(Error::InvalidParameter(
                "warm start orders exceed the requested orders".into(),
            ));
        }
    }

    // Reduced parameter space: b_0 is fixed by the DC constraint.
    let dc: f64 = target.iter().map(|t| t.to_f64().unwrap()).sum();
    let dim = (m - 1) + q;
    let mut x0 = vec![0.0f64; dim];
    match &opts.initial {
        Some(initial) => {
            for (i, v) in initial.feedforward().iter().skip(1).enumerate() {
                x0[i] = v.to_f64().unwrap();
            }
            for (i, v) in initial.feedback().iter().enumerate() {
                x0[m - 1 + i] = v.to_f64().unwrap();
            }
        }
        None => {
            // FIR truncation of the target: always stable.
            for i in 1..m.min(target.len()) {
                x0[i - 1] = target[i].to_f64().unwrap();
            }
        }
    }

    let mut rng = StdRng::seed_from_u64(opts.seed);
    let mut winner: Option<NelderMeadOutcome> = None;
    for restart in 0..opts.restarts.max(1) {
        let start: Vec<f64> = if restart == 0 {
            x0.clone()
        } else {
            x0.iter().map(|v| v + rng.gen_range(-0.5..0.5)).collect()
        };
        let outcome = if dim == 0 {
            let value = objective::<T>(&start, m, dc, target);
            NelderMeadOutcome {
                best: start,
                value,
                evals: 1,
                converged: true,
            }
        } else {
            nelder_mead(
                |p| objective::<T>(p, m, dc, target),
                &start,
                opts.simplex_scale,
                opts.diameter_tol,
                opts.max_evals,
            )
        };
        let (_, a) = expand_params::<T>(&outcome.best, m, dc);
        if feedback_spectral_radius(&a) >= 1.0 {
            continue;
        }
        let better = match &winner {
            None => true,
            Some(w) => outcome.value < w.value,
        };
        if better {
            winner = Some(outcome);
        }
    }

    let outcome = winner.ok_or_else(|| {
        Error::Fit(format!(
            "no stable candidate of orders ({m}, {q}) found across {} restarts",
            opts.restarts.max(1)
        ))
    })?;

    let (b, a) = expand_params::<T>(&outcome.best, m, dc);
    let filter = IirFilterPair::new(b, a)?;
    // Report the plain mean-square error, without the stability penalty term.
    let response = iir_impulse_response(&filter, target.len() - 1);
    let mse = response
        .iter()
        .zip(target)
        .map(|(r, t)| {
            let d = r.to_f64().unwrap() - t.to_f64().unwrap();
            d * d
        })
        .sum::<f64>()
        / target.len() as f64;

    Ok((
        filter,
        FitReport {
            mse: cast::<T>(mse),
            iterations: outcome.evals,
            converged: outcome.converged,
            horizon: target.len() - 1,
        },
    ))
}
