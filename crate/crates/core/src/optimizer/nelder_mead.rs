//! Nelder-Mead simplex search confined to the unit box.
//!
//! Trial points are clamped to `[0, 1]^d` before evaluation, so the simplex
//! can collapse onto a face when the optimum lies on the boundary.

#[derive(Debug, Clone)]
pub(crate) struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop once the objective spread over the simplex falls below this.
    pub f_tol: f64,
    /// ... and the simplex diameter falls below this.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 200,
            f_tol: 1e-13,
            x_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct NelderMeadOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn clamp_unit(x: &mut [f64]) {
    for v in x {
        *v = v.clamp(0.0, 1.0);
    }
}

/// Minimize `f` from `start`, with initial edge lengths `steps` (signs
/// chosen to point into the box). `on_eval` sees every evaluated point.
pub(crate) fn minimize<F, G>(
    mut f: F,
    start: &[f64],
    steps: &[f64],
    opts: &NelderMeadOptions,
    mut on_eval: G,
) -> NelderMeadOutcome
where
    F: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64], f64),
{
    let n = start.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        on_eval(x, v);
        v
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut x0 = start.to_vec();
    clamp_unit(&mut x0);
    let f0 = eval(&x0, &mut evals);
    simplex.push((x0.clone(), f0));
    for i in 0..n {
        let mut x = x0.clone();
        let h = steps[i].abs();
        x[i] = if x[i] + h <= 1.0 { x[i] + h } else { x[i] - h };
        clamp_unit(&mut x);
        let fx = eval(&x, &mut evals);
        simplex.push((x, fx));
    }

    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let spread = if worst.is_finite() {
            worst - best
        } else {
            f64::INFINITY
        };
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= opts.f_tol && diameter <= opts.x_tol {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (c - w))
                .collect();
            clamp_unit(&mut p);
            p
        };

        let xr = along(REFLECT);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(EXPAND);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let x = along(CONTRACT * REFLECT);
            let fx = eval(&x, &mut evals);
            (x, fx)
        } else {
            let x = along(-CONTRACT);
            let fx = eval(&x, &mut evals);
            (x, fx)
        };
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        // shrink towards the best vertex
        let anchor = simplex[0].0.clone();
        for (x, fx) in simplex.iter_mut().skip(1) {
            for (v, a) in x.iter_mut().zip(&anchor) {
                *v = a + SHRINK * (*v - a);
            }
            *fx = eval(x, &mut evals);
            if evals >= opts.max_evals {
                break;
            }
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    NelderMeadOutcome { x, f, evals }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + 2.0 * (x[1] - 0.7).powi(2) + 0.1 * x[0] * x[1];
        let opts = NelderMeadOptions {
            max_evals: 400,
            ..Default::default()
        };
        let out = minimize(f, &[0.9, 0.1], &[0.1, 0.1], &opts, |_, _| {});
        // gradient vanishes at the optimum
        assert!((2.0 * (out.x[0] - 0.3) + 0.1 * out.x[1]).abs() < 1e-4);
        assert!((4.0 * (out.x[1] - 0.7) + 0.1 * out.x[0]).abs() < 1e-4);
    }

    #[test]
    fn stays_in_box_and_reaches_corner() {
        let f = |x: &[f64]| -x[0] - 2.0 * x[1] + x[2];
        let out = minimize(
            f,
            &[0.5, 0.5, 0.5],
            &[0.1; 3],
            &NelderMeadOptions::default(),
            |x, _| {
                assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
            },
        );
        assert!((out.x[0] - 1.0).abs() < 1e-6);
        assert!((out.x[1] - 1.0).abs() < 1e-6);
        assert!(out.x[2] < 1e-6);
    }

    #[test]
    fn respects_evaluation_budget() {
        let mut count = 0;
        let out = minimize(
            |x: &[f64]| x.iter().map(|v| (v - 0.5).powi(2)).sum(),
            &[0.0; 4],
            &[0.1; 4],
            &NelderMeadOptions {
                max_evals: 30,
                ..Default::default()
            },
            |_, _| count += 1,
        );
        assert_eq!(out.evals, count);
        assert!(count <= 30 + 4);
    }
}
