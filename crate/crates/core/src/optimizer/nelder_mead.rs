//! Box-constrained Nelder-Mead simplex search.
//!
//! Trial points are projected onto the bounds, which keeps the method
//! derivative free and deterministic.

#[derive(Clone, Debug)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop when the simplex diameter (max abs coordinate spread) drops below.
    pub xatol: f64,
    /// Stop when `f_worst - f_best` drops below.
    pub fatol: f64,
    /// Stop as soon as the best value is at or below this target.
    pub target: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            xatol: 1e-9,
            fatol: 1e-15,
            target: f64::NEG_INFINITY,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    /// Best value after every iteration.
    pub trace: Vec<f64>,
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(*lo, *hi);
    }
}

/// Minimizes `f` from `x0` with an initial simplex of per-coordinate
/// `steps`.
pub fn minimize(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    steps: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut start = x0.to_vec();
    project(&mut start, lower, upper);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(&start, &mut evals);
    simplex.push((start.clone(), f0));
    for i in 0..n {
        let mut x = start.clone();
        let mut step = steps[i];
        if step == 0.0 {
            step = 1e-3;
        }
        x[i] += step;
        if x[i] > upper[i] {
            x[i] = start[i] - step;
        }
        project(&mut x, lower, upper);
        let fx = eval(&x, &mut evals);
        simplex.push((x, fx));
    }
    let mut trace = Vec::new();

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        trace.push(simplex[0].1);
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let spread = (0..n)
            .map(|j| {
                let (lo, hi) = simplex
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                        (lo.min(p.0[j]), hi.max(p.0[j]))
                    });
                hi - lo
            })
            .fold(0.0, f64::max);
        if best <= opts.target
            || evals >= opts.max_evals
            || (spread <= opts.xatol && (worst - best).abs() <= opts.fatol.max(opts.xatol))
            || spread <= opts.xatol * 1e-3
        {
            break;
        }
        if (worst - best).abs() <= opts.fatol && spread <= opts.xatol * 1e3 {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|p| p.0[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            let mut x: Vec<f64> = centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (c - w))
                .collect();
            project(&mut x, lower, upper);
            x
        };

        let xr = along(1.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    let mut x: Vec<f64> =
                        p.0.iter()
                            .zip(&x0)
                            .map(|(v, b)| b + 0.5 * (v - b))
                            .collect();
                    project(&mut x, lower, upper);
                    p.1 = eval(&x, &mut evals);
                    p.0 = x;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    NelderMeadResult { x, f, evals, trace }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize(
            f,
            &[-1.2, 1.0],
            &[0.1, 0.1],
            &[-5.0, -5.0],
            &[5.0, 5.0],
            &NelderMeadOptions {
                max_evals: 5000,
                xatol: 1e-10,
                fatol: 1e-20,
                ..Default::default()
            },
        );
        assert!(
            (r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6,
            "{:?}",
            r.x
        );
    }

    #[test]
    fn respects_bounds() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + (x[1] + 2.0).powi(2);
        let r = minimize(
            f,
            &[0.0, 0.0],
            &[0.5, 0.5],
            &[-1.0, -1.0],
            &[1.0, 1.0],
            &Default::default(),
        );
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn trace_is_non_increasing() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let r = minimize(
            f,
            &[1.0, -2.0, 0.5],
            &[0.3; 3],
            &[-5.0; 3],
            &[5.0; 3],
            &Default::default(),
        );
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.f < 1e-12);
    }
}
