//! Batched LSTM and dense layers with explicit backward passes.
//!
//! Gate order inside the fused `4H` pre-activation is input, forget, cell,
//! output. Weights are stored input-major (`in x out`) so a batch step is a
//! single `x.dot(w)`.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    /// `in x 4H`
    pub w: Array2<f64>,
    /// `H x 4H`
    pub u: Array2<f64>,
    /// `4H`
    pub b: Array1<f64>,
}

impl LstmParams {
    pub fn hidden(&self) -> usize {
        self.u.nrows()
    }

    pub fn zeros_like(&self) -> Self {
        LstmParams {
            w: Array2::zeros(self.w.raw_dim()),
            u: Array2::zeros(self.u.raw_dim()),
            b: Array1::zeros(self.b.raw_dim()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    /// `in x out`
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl DenseParams {
    pub fn zeros_like(&self) -> Self {
        DenseParams {
            w: Array2::zeros(self.w.raw_dim()),
            b: Array1::zeros(self.b.raw_dim()),
        }
    }

    pub fn affine(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.w) + &self.b
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Inverted dropout: kept units are scaled by `1 / (1 - rate)`. Returns the
/// dropped-out activations and the scaled mask.
pub fn apply_dropout(x: &Array2<f64>, rate: f64, rng: &mut ChaCha8Rng) -> (Array2<f64>, Array2<f64>) {
    let scale = 1.0 / (1.0 - rate);
    let mask = Array2::from_shape_simple_fn(x.raw_dim(), || {
        if rng.gen::<f64>() < rate {
            0.0
        } else {
            scale
        }
    });
    (x * &mask, mask)
}

pub(crate) struct LstmTrace {
    /// All step inputs stacked step-major, `(T*B) x in`.
    xs: Array2<f64>,
    batch: usize,
    /// `hs[t]` is the hidden state entering step `t`; `hs[0]` is zero.
    hs: Vec<Array2<f64>>,
    cs: Vec<Array2<f64>>,
    /// Activated gates per step, `B x 4H`.
    gates: Vec<Array2<f64>>,
    tanh_cs: Vec<Array2<f64>>,
    masks: Vec<Option<Array2<f64>>>,
    /// Layer outputs after dropout.
    pub ys: Vec<Array2<f64>>,
}

fn stack_steps(steps: &[Array2<f64>]) -> Array2<f64> {
    let views: Vec<_> = steps.iter().map(|a| a.view()).collect();
    ndarray::concatenate(Axis(0), &views).expect("steps share a shape")
}

pub(crate) fn lstm_forward(
    p: &LstmParams,
    xs: Vec<Array2<f64>>,
    dropout: Option<(f64, &mut ChaCha8Rng)>,
) -> LstmTrace {
    let batch = xs[0].nrows();
    let steps = xs.len();
    let h = p.hidden();
    let mut dropout = dropout;
    let xs = stack_steps(&xs);
    // Input projections for every step in one product.
    let mut zx = xs.dot(&p.w);
    zx += &p.b;
    let mut trace = LstmTrace {
        hs: vec![Array2::zeros((batch, h))],
        cs: vec![Array2::zeros((batch, h))],
        gates: Vec::with_capacity(steps),
        tanh_cs: Vec::with_capacity(steps),
        masks: Vec::with_capacity(steps),
        ys: Vec::with_capacity(steps),
        xs: Array2::zeros((0, 0)),
        batch,
    };
    for t in 0..steps {
        let h_prev = trace.hs.last().unwrap();
        let c_prev = trace.cs.last().unwrap();
        let mut z = zx.slice(s![t * batch..(t + 1) * batch, ..]).to_owned();
        if t > 0 {
            general_mat_mul(1.0, h_prev, &p.u, 1.0, &mut z);
        }

        let mut c = Array2::zeros((batch, h));
        let mut tc = Array2::zeros((batch, h));
        let mut h_new = Array2::zeros((batch, h));
        for r in 0..batch {
            let zr = z.row_mut(r).into_slice().unwrap();
            let cp = c_prev.row(r);
            let mut cr = c.row_mut(r);
            let mut tcr = tc.row_mut(r);
            let mut hr = h_new.row_mut(r);
            for j in 0..h {
                let i = sigmoid(zr[j]);
                let f = sigmoid(zr[h + j]);
                let g = zr[2 * h + j].tanh();
                let o = sigmoid(zr[3 * h + j]);
                zr[j] = i;
                zr[h + j] = f;
                zr[2 * h + j] = g;
                zr[3 * h + j] = o;
                let cv = f * cp[j] + i * g;
                let t = cv.tanh();
                cr[j] = cv;
                tcr[j] = t;
                hr[j] = o * t;
            }
        }
        let (y, mask) = match dropout.as_mut() {
            Some((rate, rng)) if *rate > 0.0 => {
                let (y, m) = apply_dropout(&h_new, *rate, rng);
                (y, Some(m))
            }
            _ => (h_new.clone(), None),
        };
        trace.gates.push(z);
        trace.tanh_cs.push(tc);
        trace.cs.push(c);
        trace.hs.push(h_new);
        trace.masks.push(mask);
        trace.ys.push(y);
    }
    trace.xs = xs;
    trace
}

/// Backpropagation through time. `dys[t]` is the loss gradient with respect
/// to the (post-dropout) output at step `t`. Accumulates into `grad` and
/// returns the gradient with respect to each step's input.
pub(crate) fn lstm_backward(
    p: &LstmParams,
    trace: &LstmTrace,
    dys: &[Array2<f64>],
    grad: &mut LstmParams,
) -> Vec<Array2<f64>> {
    let steps = trace.gates.len();
    let batch = trace.batch;
    let h = p.hidden();
    let mut dh_next = Array2::<f64>::zeros((batch, h));
    let mut dc_next = Array2::<f64>::zeros((batch, h));
    // Gate pre-activation gradients for every step, stacked like `xs`.
    let mut dz_all = Array2::<f64>::zeros((steps * batch, 4 * h));
    for t in (0..steps).rev() {
        let mut dh = match &trace.masks[t] {
            Some(m) => &dys[t] * m,
            None => dys[t].clone(),
        };
        dh += &dh_next;
        let gates = &trace.gates[t];
        let tc = &trace.tanh_cs[t];
        let c_prev = &trace.cs[t];
        let mut dz = dz_all.slice_mut(s![t * batch..(t + 1) * batch, ..]);
        for r in 0..batch {
            let gr = gates.row(r);
            let mut dzr = dz.row_mut(r);
            let mut dcn = dc_next.row_mut(r);
            for j in 0..h {
                let (i, f, g, o) = (gr[j], gr[h + j], gr[2 * h + j], gr[3 * h + j]);
                let t_c = tc[[r, j]];
                let dhv = dh[[r, j]];
                let d_o = dhv * t_c;
                let dc = dhv * o * (1.0 - t_c * t_c) + dcn[j];
                let d_i = dc * g;
                let d_g = dc * i;
                let d_f = dc * c_prev[[r, j]];
                dcn[j] = dc * f;
                dzr[j] = d_i * i * (1.0 - i);
                dzr[h + j] = d_f * f * (1.0 - f);
                dzr[2 * h + j] = d_g * (1.0 - g * g);
                dzr[3 * h + j] = d_o * o * (1.0 - o);
            }
        }
        if t > 0 {
            dh_next = dz.dot(&p.u.t());
        }
    }
    general_mat_mul(1.0, &trace.xs.t(), &dz_all, 1.0, &mut grad.w);
    if steps > 1 {
        // hs[0] is zero, so step 0 contributes nothing to the recurrent weights.
        let h_prev = stack_steps(&trace.hs[1..steps]);
        let dz_later = dz_all.slice(s![batch.., ..]);
        general_mat_mul(1.0, &h_prev.t(), &dz_later, 1.0, &mut grad.u);
    }
    grad.b += &dz_all.sum_axis(Axis(0));
    let dx_all = dz_all.dot(&p.w.t());
    (0..steps)
        .map(|t| dx_all.slice(s![t * batch..(t + 1) * batch, ..]).to_owned())
        .collect()
}

pub(crate) struct DenseTrace {
    x: Array2<f64>,
    /// `tanh` activations before dropout.
    a: Array2<f64>,
    mask: Option<Array2<f64>>,
    pub y: Array2<f64>,
}

pub(crate) fn dense_tanh_forward(
    p: &DenseParams,
    x: Array2<f64>,
    dropout: Option<(f64, &mut ChaCha8Rng)>,
) -> DenseTrace {
    let a = p.affine(&x).mapv_into(f64::tanh);
    let (y, mask) = match dropout {
        Some((rate, rng)) if rate > 0.0 => {
            let (y, m) = apply_dropout(&a, rate, rng);
            (y, Some(m))
        }
        _ => (a.clone(), None),
    };
    DenseTrace { x, a, mask, y }
}

pub(crate) fn dense_tanh_backward(
    p: &DenseParams,
    trace: &DenseTrace,
    dy: &Array2<f64>,
    grad: &mut DenseParams,
) -> Array2<f64> {
    let mut dz = match &trace.mask {
        Some(m) => dy * m,
        None => dy.clone(),
    };
    dz.zip_mut_with(&trace.a, |d, &a| *d *= 1.0 - a * a);
    general_mat_mul(1.0, &trace.x.t(), &dz, 1.0, &mut grad.w);
    grad.b += &dz.sum_axis(Axis(0));
    dz.dot(&p.w.t())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn dropout_matches_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = Array2::from_shape_fn((1, 8), |(_, j)| 0.1 + 0.1 * j as f64);
        let samples = 10_000;
        let mut acc = Array2::<f64>::zeros((1, 8));
        for _ in 0..samples {
            acc += &apply_dropout(&h, 0.5, &mut rng).0;
        }
        acc /= samples as f64;
        let err = (&acc - &h).mapv(|x| x * x).sum().sqrt();
        let norm = h.mapv(|x| x * x).sum().sqrt();
        assert!(err / norm < 0.02, "relative error {}", err / norm);
    }

    #[test]
    fn dropout_mask_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Array2::from_elem((4, 50), 1.0);
        let (y, m) = apply_dropout(&x, 0.5, &mut rng);
        assert!(m.iter().all(|&v| v == 0.0 || v == 2.0));
        assert_eq!(y, m);
    }

    #[test]
    fn zero_input_zero_state_uses_only_biases() {
        let p = LstmParams {
            w: Array2::from_elem((3, 8), 0.7),
            u: Array2::from_elem((2, 8), -0.3),
            b: Array1::from_vec(vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]),
        };
        let tr = lstm_forward(&p, vec![Array2::zeros((1, 3))], None);
        let (i, g, o) = (sigmoid(0.1), 0.5f64.tanh(), sigmoid(0.7));
        let expect = o * (i * g).tanh();
        assert!((tr.ys[0][[0, 0]] - expect).abs() < 1e-15);
    }
}
