#![allow(clippy::needless_range_loop)]

//! Independent oracles shared by the integration suites. These deliberately
//! avoid the library's own computational paths: gates become dense
//! matrices, the dual solver is checked against grid search, and metric
//! values against direct enumeration.

use num_complex::Complex64;

use qepitope::circuits::Gate;
use qepitope::dualsvm::dual_objective;
use qepitope::qkernel::KernelMatrix;

/// Dense unitary of one gate on an `n`-qubit register, built column by
/// column from the textbook matrix elements.
pub fn gate_unitary(gate: &Gate, n: usize) -> Vec<Vec<Complex64>> {
    let dim = 1usize << n;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut u = vec![vec![zero; dim]; dim];

    let single = |m: [[Complex64; 2]; 2], q: usize, u: &mut Vec<Vec<Complex64>>| {
        for col in 0..dim {
            let b = (col >> q) & 1;
            for (out_b, row_m) in m.iter().enumerate() {
                let row = (col & !(1 << q)) | (out_b << q);
                u[row][col] += row_m[b];
            }
        }
    };

    match *gate {
        Gate::H(q) => {
            let f = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            single([[f, f], [f, -f]], q, &mut u);
        }
        Gate::X(q) => single([[zero, one], [one, zero]], q, &mut u),
        Gate::Y(q) => single(
            [
                [zero, Complex64::new(0.0, -1.0)],
                [Complex64::new(0.0, 1.0), zero],
            ],
            q,
            &mut u,
        ),
        Gate::Z(q) => single([[one, zero], [zero, -one]], q, &mut u),
        Gate::Rx(q, a) => {
            let (c, s) = ((a / 2.0).cos(), (a / 2.0).sin());
            single(
                [
                    [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                    [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
                ],
                q,
                &mut u,
            );
        }
        Gate::Ry(q, a) => {
            let (c, s) = ((a / 2.0).cos(), (a / 2.0).sin());
            single(
                [
                    [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                ],
                q,
                &mut u,
            );
        }
        Gate::Rz(q, a) => {
            let lo = Complex64::from_polar(1.0, -a / 2.0);
            let hi = Complex64::from_polar(1.0, a / 2.0);
            single([[lo, zero], [zero, hi]], q, &mut u);
        }
        Gate::Cnot(ctrl, tgt) => {
            for col in 0..dim {
                let row = if (col >> ctrl) & 1 == 1 {
                    col ^ (1 << tgt)
                } else {
                    col
                };
                u[row][col] = one;
            }
        }
        Gate::Cz(a, b) => {
            for col in 0..dim {
                u[col][col] = if (col >> a) & 1 == 1 && (col >> b) & 1 == 1 {
                    -one
                } else {
                    one
                };
            }
        }
        Gate::Swap(a, b) => {
            for col in 0..dim {
                let ba = (col >> a) & 1;
                let bb = (col >> b) & 1;
                let row = if ba != bb {
                    col ^ (1 << a) ^ (1 << b)
                } else {
                    col
                };
                u[row][col] = one;
            }
        }
    }
    u
}

pub fn apply_unitary(u: &[Vec<Complex64>], state: &[Complex64]) -> Vec<Complex64> {
    let dim = state.len();
    (0..dim)
        .map(|row| (0..dim).map(|col| u[row][col] * state[col]).sum())
        .collect()
}

/// Exhaustive grid search over the feasible slice of the dual problem:
/// every multiplier but the first is gridded and the first is fixed by the
/// balance constraint. Two free dimensions are searched exhaustively at
/// `final_step`; higher dimensions start at `coarse_step` and refine around
/// the incumbent, which is sound because the objective is concave.
pub fn grid_search_dual(
    kernel: &KernelMatrix,
    labels: &[i8],
    upper: f64,
    coarse_step: f64,
    final_step: f64,
) -> f64 {
    let t = kernel.size();
    let free = t - 1;
    let mut center = vec![upper / 2.0; free];
    let mut step = coarse_step;
    let mut window = upper / 2.0;
    let mut best = f64::NEG_INFINITY;
    loop {
        let lo: Vec<f64> = center.iter().map(|&m| (m - window).max(0.0)).collect();
        let hi: Vec<f64> = center.iter().map(|&m| (m + window).min(upper)).collect();
        let counts: Vec<usize> = (0..free)
            .map(|d| ((hi[d] - lo[d]) / step).round() as usize + 1)
            .collect();
        let mut idx = vec![0usize; free];
        let mut alphas = vec![0.0; t];
        'grid: loop {
            for d in 0..free {
                alphas[d + 1] = (lo[d] + idx[d] as f64 * step).min(hi[d]);
            }
            let resid: f64 = (1..t).map(|k| labels[k] as f64 * alphas[k]).sum();
            let a0 = -(labels[0] as f64) * resid;
            if (0.0..=upper + 1e-12).contains(&a0) {
                alphas[0] = a0;
                let obj = dual_objective(&alphas, kernel, labels).unwrap();
                if obj > best {
                    best = obj;
                    center = alphas[1..].to_vec();
                }
            }
            let mut d = 0;
            loop {
                if d == free {
                    break 'grid;
                }
                idx[d] += 1;
                if idx[d] < counts[d] {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
        if step <= final_step {
            break;
        }
        window = step * 2.0;
        step = (step / 10.0).max(final_step);
    }
    best
}
