//! Adaptive embedded Runge–Kutta integration (Dormand–Prince 5(4)).
//!
//! Steps are clamped so that every requested grid time is hit exactly;
//! there is no interpolation between steps.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t:e} (h = {h:e}); system too stiff for the tolerance")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),
    #[error("time grid must be strictly increasing")]
    GridNotMonotone,
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-10, max_steps: 50_000_000 }
    }
}

// Dormand-Prince coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = rhs(t, y)` from `t_grid[0]`, invoking `observe(i, t, y)`
/// at every grid time (including the initial one).
pub fn integrate_to_grid<F, O>(
    rhs: F,
    y0: &[f64],
    t_grid: &[f64],
    opts: &OdeOptions,
    observe: O,
) -> Result<(), OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(usize, f64, &[f64]),
{
    integrate_to_grid_with(rhs, y0, t_grid, opts, |_| {}, observe)
}

/// [`integrate_to_grid`] with a projection hook applied to the state after
/// every accepted step (e.g. renormalising a probability vector onto its
/// conserved sum, which plain summation slowly leaks by rounding).
pub fn integrate_to_grid_with<F, P, O>(
    mut rhs: F,
    y0: &[f64],
    t_grid: &[f64],
    opts: &OdeOptions,
    mut post_step: P,
    mut observe: O,
) -> Result<(), OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    P: FnMut(&mut [f64]),
    O: FnMut(usize, f64, &[f64]),
{
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(OdeError::GridNotMonotone);
    }
    let dim = y0.len();
    let mut y = y0.to_vec();
    let mut t = t_grid[0];
    observe(0, t, &y);
    if t_grid.len() == 1 {
        return Ok(());
    }

    let span = t_grid[t_grid.len() - 1] - t_grid[0];
    let h_floor = span * 1e-14;
    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; dim]).collect();
    let mut y_stage = vec![0.0; dim];
    let mut y5 = vec![0.0; dim];
    let mut h = span / 1024.0;
    let mut steps = 0usize;

    for (target_idx, &target) in t_grid.iter().enumerate().skip(1) {
        while t < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(OdeError::TooManySteps(opts.max_steps));
            }
            let h_try = h.min(target - t);
            rhs(t, &y, &mut k[0]);
            for stage in 0..6 {
                for (d, ys) in y_stage.iter_mut().enumerate() {
                    let mut acc = y[d];
                    for (j, kj) in k.iter().enumerate().take(stage + 1) {
                        acc += h_try * A[stage][j] * kj[d];
                    }
                    *ys = acc;
                }
                let t_stage = t + C[stage] * h_try;
                let (head, tail) = k.split_at_mut(stage + 1);
                let _ = head;
                rhs(t_stage, &y_stage, &mut tail[0]);
            }
            let mut err_sq = 0.0;
            for d in 0..dim {
                let mut v5 = y[d];
                let mut v4 = y[d];
                for (j, kj) in k.iter().enumerate() {
                    v5 += h_try * B5[j] * kj[d];
                    v4 += h_try * B4[j] * kj[d];
                }
                y5[d] = v5;
                let scale = opts.atol + opts.rtol * y[d].abs().max(v5.abs());
                let e = (v5 - v4) / scale;
                err_sq += e * e;
            }
            let err = (err_sq / dim as f64).sqrt();
            if err <= 1.0 {
                t += h_try;
                y.copy_from_slice(&y5);
                post_step(&mut y);
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).min(5.0) };
                h = (h_try * grow).max(h_floor);
            } else {
                h = h_try * (0.9 * err.powf(-0.2)).max(0.2);
                if h < h_floor {
                    return Err(OdeError::StepUnderflow { t, h });
                }
            }
        }
        t = target;
        observe(target_idx, t, &y);
    }
    Ok(())
}
