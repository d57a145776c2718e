//! LSTM and GRU cells and a single-layer sequence runner with
//! backpropagation through time.
//!
//! LSTM step:
//!
//! ```text
//! f = sigmoid(W_fx x + W_fh h + b_f)
//! i = sigmoid(W_ix x + W_ih h + b_i)
//! g = tanh(W_cx x + W_ch h + b_c)          candidate cell state
//! C = f * C_prev + i * g
//! o = sigmoid(W_ox x + W_oh h + b_o)
//! h = o * tanh(C)
//! ```
//!
//! GRU step (the reset gate scales the recurrent product, not `h_prev`):
//!
//! ```text
//! z = sigmoid(W_zx x + W_zh h + b_z)
//! r = sigmoid(W_rx x + W_rh h + b_r)
//! n = tanh(W_hx x + r * (W_hh h) + b_h)
//! h = z * h_prev + (1 - z) * n
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{add_acc, init, matvec_acc, matvec_t_acc, outer_acc, ParamKind, ParamSet};
use crate::error::{Error, Result};
use crate::tensor::{sigmoid, Real, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RnnKind {
    Lstm,
    Gru,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams<T> {
    pub w_fx: Tensor<T>,
    pub w_ix: Tensor<T>,
    pub w_cx: Tensor<T>,
    pub w_ox: Tensor<T>,
    pub w_fh: Tensor<T>,
    pub w_ih: Tensor<T>,
    pub w_ch: Tensor<T>,
    pub w_oh: Tensor<T>,
    pub b_f: Tensor<T>,
    pub b_i: Tensor<T>,
    pub b_c: Tensor<T>,
    pub b_o: Tensor<T>,
}

impl<T: Real> LstmParams<T> {
    pub fn zeros(units: usize, input_dim: usize) -> Self {
        let x = || Tensor::zeros(&[units, input_dim]);
        let h = || Tensor::zeros(&[units, units]);
        let b = || Tensor::zeros(&[units]);
        LstmParams {
            w_fx: x(),
            w_ix: x(),
            w_cx: x(),
            w_ox: x(),
            w_fh: h(),
            w_ih: h(),
            w_ch: h(),
            w_oh: h(),
            b_f: b(),
            b_i: b(),
            b_c: b(),
            b_o: b(),
        }
    }

    /// Glorot-uniform input kernels, orthogonal recurrent kernels, zero biases.
    pub fn init(units: usize, input_dim: usize, rng: &mut impl Rng) -> Self {
        let mut p = Self::zeros(units, input_dim);
        for w in [&mut p.w_fx, &mut p.w_ix, &mut p.w_cx, &mut p.w_ox] {
            *w = init::glorot_uniform(&[units, input_dim], input_dim, units, rng);
        }
        for w in [&mut p.w_fh, &mut p.w_ih, &mut p.w_ch, &mut p.w_oh] {
            *w = init::orthogonal(units, rng);
        }
        p
    }

    pub fn units(&self) -> usize {
        self.w_fx.shape()[0]
    }

    pub fn input_dim(&self) -> usize {
        self.w_fx.shape()[1]
    }
}

impl<T: Real> ParamSet<T> for LstmParams<T> {
    fn named(&self) -> Vec<(&'static str, ParamKind, &Tensor<T>)> {
        use ParamKind::*;
        vec![
            ("w_fx", InputKernel, &self.w_fx),
            ("w_ix", InputKernel, &self.w_ix),
            ("w_cx", InputKernel, &self.w_cx),
            ("w_ox", InputKernel, &self.w_ox),
            ("w_fh", RecurrentKernel, &self.w_fh),
            ("w_ih", RecurrentKernel, &self.w_ih),
            ("w_ch", RecurrentKernel, &self.w_ch),
            ("w_oh", RecurrentKernel, &self.w_oh),
            ("b_f", Bias, &self.b_f),
            ("b_i", Bias, &self.b_i),
            ("b_c", Bias, &self.b_c),
            ("b_o", Bias, &self.b_o),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor<T>> {
        vec![
            &mut self.w_fx,
            &mut self.w_ix,
            &mut self.w_cx,
            &mut self.w_ox,
            &mut self.w_fh,
            &mut self.w_ih,
            &mut self.w_ch,
            &mut self.w_oh,
            &mut self.b_f,
            &mut self.b_i,
            &mut self.b_c,
            &mut self.b_o,
        ]
    }

    fn zeros_like(&self) -> Self {
        Self::zeros(self.units(), self.input_dim())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GruParams<T> {
    pub w_zx: Tensor<T>,
    pub w_rx: Tensor<T>,
    pub w_hx: Tensor<T>,
    pub w_zh: Tensor<T>,
    pub w_rh: Tensor<T>,
    pub w_hh: Tensor<T>,
    pub b_z: Tensor<T>,
    pub b_r: Tensor<T>,
    pub b_h: Tensor<T>,
}

impl<T: Real> GruParams<T> {
    pub fn zeros(units: usize, input_dim: usize) -> Self {
        let x = || Tensor::zeros(&[units, input_dim]);
        let h = || Tensor::zeros(&[units, units]);
        let b = || Tensor::zeros(&[units]);
        GruParams {
            w_zx: x(),
            w_rx: x(),
            w_hx: x(),
            w_zh: h(),
            w_rh: h(),
            w_hh: h(),
            b_z: b(),
            b_r: b(),
            b_h: b(),
        }
    }

    pub fn init(units: usize, input_dim: usize, rng: &mut impl Rng) -> Self {
        let mut p = Self::zeros(units, input_dim);
        for w in [&mut p.w_zx, &mut p.w_rx, &mut p.w_hx] {
            *w = init::glorot_uniform(&[units, input_dim], input_dim, units, rng);
        }
        for w in [&mut p.w_zh, &mut p.w_rh, &mut p.w_hh] {
            *w = init::orthogonal(units, rng);
        }
        p
    }

    pub fn units(&self) -> usize {
        self.w_zx.shape()[0]
    }

    pub fn input_dim(&self) -> usize {
        self.w_zx.shape()[1]
    }
}

impl<T: Real> ParamSet<T> for GruParams<T> {
    fn named(&self) -> Vec<(&'static str, ParamKind, &Tensor<T>)> {
        use ParamKind::*;
        vec![
            ("w_zx", InputKernel, &self.w_zx),
            ("w_rx", InputKernel, &self.w_rx),
            ("w_hx", InputKernel, &self.w_hx),
            ("w_zh", RecurrentKernel, &self.w_zh),
            ("w_rh", RecurrentKernel, &self.w_rh),
            ("w_hh", RecurrentKernel, &self.w_hh),
            ("b_z", Bias, &self.b_z),
            ("b_r", Bias, &self.b_r),
            ("b_h", Bias, &self.b_h),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor<T>> {
        vec![
            &mut self.w_zx,
            &mut self.w_rx,
            &mut self.w_hx,
            &mut self.w_zh,
            &mut self.w_rh,
            &mut self.w_hh,
            &mut self.b_z,
            &mut self.b_r,
            &mut self.b_h,
        ]
    }

    fn zeros_like(&self) -> Self {
        Self::zeros(self.units(), self.input_dim())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RnnParams<T> {
    Lstm(LstmParams<T>),
    Gru(GruParams<T>),
}

impl<T: Real> RnnParams<T> {
    pub fn init(kind: RnnKind, units: usize, input_dim: usize, rng: &mut impl Rng) -> Self {
        match kind {
            RnnKind::Lstm => RnnParams::Lstm(LstmParams::init(units, input_dim, rng)),
            RnnKind::Gru => RnnParams::Gru(GruParams::init(units, input_dim, rng)),
        }
    }

    pub fn kind(&self) -> RnnKind {
        match self {
            RnnParams::Lstm(_) => RnnKind::Lstm,
            RnnParams::Gru(_) => RnnKind::Gru,
        }
    }

    pub fn units(&self) -> usize {
        match self {
            RnnParams::Lstm(p) => p.units(),
            RnnParams::Gru(p) => p.units(),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            RnnParams::Lstm(p) => p.input_dim(),
            RnnParams::Gru(p) => p.input_dim(),
        }
    }
}

impl<T: Real> ParamSet<T> for RnnParams<T> {
    fn named(&self) -> Vec<(&'static str, ParamKind, &Tensor<T>)> {
        match self {
            RnnParams::Lstm(p) => p.named(),
            RnnParams::Gru(p) => p.named(),
        }
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor<T>> {
        match self {
            RnnParams::Lstm(p) => p.tensors_mut(),
            RnnParams::Gru(p) => p.tensors_mut(),
        }
    }

    fn zeros_like(&self) -> Self {
        match self {
            RnnParams::Lstm(p) => RnnParams::Lstm(p.zeros_like()),
            RnnParams::Gru(p) => RnnParams::Gru(p.zeros_like()),
        }
    }
}

#[derive(Debug, Clone)]
struct LstmStep<T> {
    h_prev: Vec<T>,
    c_prev: Vec<T>,
    f: Vec<T>,
    i: Vec<T>,
    g: Vec<T>,
    o: Vec<T>,
    c: Vec<T>,
    tanh_c: Vec<T>,
    h: Vec<T>,
}

fn gate<T: Real>(wx: &Tensor<T>, wh: &Tensor<T>, b: &Tensor<T>, x: &[T], h: &[T]) -> Vec<T> {
    let mut a = b.data().to_vec();
    matvec_acc(wx, x, &mut a);
    matvec_acc(wh, h, &mut a);
    a
}

fn lstm_cell<T: Real>(p: &LstmParams<T>, x: &[T], h_prev: &[T], c_prev: &[T]) -> LstmStep<T> {
    let f: Vec<T> = gate(&p.w_fx, &p.w_fh, &p.b_f, x, h_prev).into_iter().map(sigmoid).collect();
    let i: Vec<T> = gate(&p.w_ix, &p.w_ih, &p.b_i, x, h_prev).into_iter().map(sigmoid).collect();
    let g: Vec<T> = gate(&p.w_cx, &p.w_ch, &p.b_c, x, h_prev).into_iter().map(T::tanh).collect();
    let o: Vec<T> = gate(&p.w_ox, &p.w_oh, &p.b_o, x, h_prev).into_iter().map(sigmoid).collect();
    let c: Vec<T> = (0..f.len()).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();
    let tanh_c: Vec<T> = c.iter().map(|v| v.tanh()).collect();
    let h = o.iter().zip(&tanh_c).map(|(&o, &t)| o * t).collect();
    LstmStep {
        h_prev: h_prev.to_vec(),
        c_prev: c_prev.to_vec(),
        f,
        i,
        g,
        o,
        c,
        tanh_c,
        h,
    }
}

fn check_step<T: Real>(x: &[T], h_prev: &[T], units: usize, input_dim: usize) -> Result<()> {
    if x.len() != input_dim || h_prev.len() != units {
        return Err(Error::shape("rnn step", &[x.len(), h_prev.len()], &[input_dim, units]));
    }
    Ok(())
}

/// One LSTM time step; returns `(h_t, C_t)`.
pub fn lstm_step<T: Real>(x: &[T], h_prev: &[T], c_prev: &[T], p: &LstmParams<T>) -> Result<(Vec<T>, Vec<T>)> {
    check_step(x, h_prev, p.units(), p.input_dim())?;
    if c_prev.len() != p.units() {
        return Err(Error::shape("lstm_step", &[c_prev.len()], &[p.units()]));
    }
    let s = lstm_cell(p, x, h_prev, c_prev);
    Ok((s.h, s.c))
}

#[derive(Debug, Clone)]
struct GruStep<T> {
    h_prev: Vec<T>,
    z: Vec<T>,
    r: Vec<T>,
    /// `W_hh h_prev`
    m: Vec<T>,
    n: Vec<T>,
    h: Vec<T>,
}

fn gru_cell<T: Real>(p: &GruParams<T>, x: &[T], h_prev: &[T]) -> GruStep<T> {
    let z: Vec<T> = gate(&p.w_zx, &p.w_zh, &p.b_z, x, h_prev).into_iter().map(sigmoid).collect();
    let r: Vec<T> = gate(&p.w_rx, &p.w_rh, &p.b_r, x, h_prev).into_iter().map(sigmoid).collect();
    let mut m = vec![T::zero(); h_prev.len()];
    matvec_acc(&p.w_hh, h_prev, &mut m);
    let mut a = p.b_h.data().to_vec();
    matvec_acc(&p.w_hx, x, &mut a);
    let n: Vec<T> = (0..a.len()).map(|k| (a[k] + r[k] * m[k]).tanh()).collect();
    let h = (0..n.len())
        .map(|k| z[k] * h_prev[k] + (T::one() - z[k]) * n[k])
        .collect();
    GruStep {
        h_prev: h_prev.to_vec(),
        z,
        r,
        m,
        n,
        h,
    }
}

/// One GRU time step; returns `h_t`.
pub fn gru_step<T: Real>(x: &[T], h_prev: &[T], p: &GruParams<T>) -> Result<Vec<T>> {
    check_step(x, h_prev, p.units(), p.input_dim())?;
    Ok(gru_cell(p, x, h_prev).h)
}

#[derive(Debug, Clone)]
enum Steps<T> {
    Lstm(Vec<LstmStep<T>>),
    Gru(Vec<GruStep<T>>),
}

#[derive(Debug, Clone)]
pub struct RnnCache<T> {
    input: Tensor<T>,
    steps: Steps<T>,
    /// `None` when the full sequence was returned.
    selected: Option<usize>,
}

impl<T> RnnCache<T> {
    pub fn selected_step(&self) -> Option<usize> {
        self.selected
    }
}

/// Runs the cell over `x: [T, d]` from zero initial state.
///
/// With `return_sequence` the output is `[T, units]` (padded steps included);
/// otherwise it is the `[units]` state at the last unmasked step.
pub fn rnn_forward<T: Real>(
    x: &Tensor<T>,
    mask: &[u8],
    p: &RnnParams<T>,
    return_sequence: bool,
) -> Result<(Tensor<T>, RnnCache<T>)> {
    let (t_len, d) = (x.rows(), x.cols());
    if x.rank() != 2 || d != p.input_dim() || mask.len() != t_len {
        return Err(Error::shape("rnn_forward", x.shape(), &[mask.len(), p.input_dim()]));
    }
    if t_len == 0 {
        return Err(Error::EmptyInput("rnn_forward"));
    }
    let last = mask.iter().rposition(|&m| m != 0).ok_or(Error::AllMasked)?;
    let steps_to_run = if return_sequence { t_len } else { last + 1 };
    let u = p.units();

    let mut h = vec![T::zero(); u];
    let (steps, states): (Steps<T>, Vec<Vec<T>>) = match p {
        RnnParams::Lstm(lp) => {
            let mut c = vec![T::zero(); u];
            let mut steps = Vec::with_capacity(steps_to_run);
            for t in 0..steps_to_run {
                let s = lstm_cell(lp, x.row(t), &h, &c);
                h.clone_from(&s.h);
                c.clone_from(&s.c);
                steps.push(s);
            }
            let states = steps.iter().map(|s| s.h.clone()).collect();
            (Steps::Lstm(steps), states)
        }
        RnnParams::Gru(gp) => {
            let mut steps = Vec::with_capacity(steps_to_run);
            for t in 0..steps_to_run {
                let s = gru_cell(gp, x.row(t), &h);
                h.clone_from(&s.h);
                steps.push(s);
            }
            let states = steps.iter().map(|s| s.h.clone()).collect();
            (Steps::Gru(steps), states)
        }
    };

    let (out, selected) = if return_sequence {
        (Tensor::new(&[t_len, u], states.concat())?, None)
    } else {
        (Tensor::vector(states[last].clone()), Some(last))
    };
    Ok((
        out,
        RnnCache {
            input: x.clone(),
            steps,
            selected,
        },
    ))
}

/// Backpropagation through time. `dy` matches the forward output shape.
pub fn rnn_backward<T: Real>(
    p: &RnnParams<T>,
    cache: &RnnCache<T>,
    dy: &Tensor<T>,
    grads: &mut RnnParams<T>,
) -> Result<Tensor<T>> {
    let u = p.units();
    let n_steps = match &cache.steps {
        Steps::Lstm(s) => s.len(),
        Steps::Gru(s) => s.len(),
    };
    let expected: Vec<usize> = match cache.selected {
        Some(_) => vec![u],
        None => vec![n_steps, u],
    };
    if dy.shape() != expected.as_slice() {
        return Err(Error::shape("rnn_backward", dy.shape(), &expected));
    }
    let upstream = |t: usize| -> Option<&[T]> {
        match cache.selected {
            Some(sel) if sel == t => Some(dy.data()),
            Some(_) => None,
            None => Some(dy.row(t)),
        }
    };

    let mut dx = Tensor::zeros(cache.input.shape());
    let mut dh_next = vec![T::zero(); u];
    match (p, grads, &cache.steps) {
        (RnnParams::Lstm(p), RnnParams::Lstm(g), Steps::Lstm(steps)) => {
            let mut dc_next = vec![T::zero(); u];
            for t in (0..steps.len()).rev() {
                let s = &steps[t];
                let x = cache.input.row(t);
                let mut dh = dh_next.clone();
                if let Some(up) = upstream(t) {
                    add_acc(&mut dh, up);
                }
                let mut da_f = vec![T::zero(); u];
                let mut da_i = vec![T::zero(); u];
                let mut da_g = vec![T::zero(); u];
                let mut da_o = vec![T::zero(); u];
                for k in 0..u {
                    let one = T::one();
                    let d_o = dh[k] * s.tanh_c[k];
                    let dc = dc_next[k] + dh[k] * s.o[k] * (one - s.tanh_c[k] * s.tanh_c[k]);
                    da_f[k] = dc * s.c_prev[k] * s.f[k] * (one - s.f[k]);
                    da_i[k] = dc * s.g[k] * s.i[k] * (one - s.i[k]);
                    da_g[k] = dc * s.i[k] * (one - s.g[k] * s.g[k]);
                    da_o[k] = d_o * s.o[k] * (one - s.o[k]);
                    dc_next[k] = dc * s.f[k];
                }
                let gates = [
                    (&da_f, &p.w_fx, &p.w_fh, &mut g.w_fx, &mut g.w_fh, &mut g.b_f),
                    (&da_i, &p.w_ix, &p.w_ih, &mut g.w_ix, &mut g.w_ih, &mut g.b_i),
                    (&da_g, &p.w_cx, &p.w_ch, &mut g.w_cx, &mut g.w_ch, &mut g.b_c),
                    (&da_o, &p.w_ox, &p.w_oh, &mut g.w_ox, &mut g.w_oh, &mut g.b_o),
                ];
                dh_next.iter_mut().for_each(|v| *v = T::zero());
                for (da, wx, wh, gwx, gwh, gb) in gates {
                    outer_acc(gwx, da, x);
                    outer_acc(gwh, da, &s.h_prev);
                    add_acc(gb.data_mut(), da);
                    matvec_t_acc(wx, da, dx.row_mut(t));
                    matvec_t_acc(wh, da, &mut dh_next);
                }
            }
        }
        (RnnParams::Gru(p), RnnParams::Gru(g), Steps::Gru(steps)) => {
            for t in (0..steps.len()).rev() {
                let s = &steps[t];
                let x = cache.input.row(t);
                let mut dh = dh_next.clone();
                if let Some(up) = upstream(t) {
                    add_acc(&mut dh, up);
                }
                let mut da_z = vec![T::zero(); u];
                let mut da_r = vec![T::zero(); u];
                let mut da_n = vec![T::zero(); u];
                let mut dm = vec![T::zero(); u];
                let mut dh_prev = vec![T::zero(); u];
                for k in 0..u {
                    let one = T::one();
                    let dz = dh[k] * (s.h_prev[k] - s.n[k]);
                    let dn = dh[k] * (one - s.z[k]);
                    let da = dn * (one - s.n[k] * s.n[k]);
                    let dr = da * s.m[k];
                    dm[k] = da * s.r[k];
                    da_n[k] = da;
                    da_z[k] = dz * s.z[k] * (one - s.z[k]);
                    da_r[k] = dr * s.r[k] * (one - s.r[k]);
                    dh_prev[k] = dh[k] * s.z[k];
                }
                outer_acc(&mut g.w_zx, &da_z, x);
                outer_acc(&mut g.w_rx, &da_r, x);
                outer_acc(&mut g.w_hx, &da_n, x);
                outer_acc(&mut g.w_zh, &da_z, &s.h_prev);
                outer_acc(&mut g.w_rh, &da_r, &s.h_prev);
                outer_acc(&mut g.w_hh, &dm, &s.h_prev);
                add_acc(g.b_z.data_mut(), &da_z);
                add_acc(g.b_r.data_mut(), &da_r);
                add_acc(g.b_h.data_mut(), &da_n);
                let dxt = dx.row_mut(t);
                matvec_t_acc(&p.w_zx, &da_z, dxt);
                matvec_t_acc(&p.w_rx, &da_r, dxt);
                matvec_t_acc(&p.w_hx, &da_n, dxt);
                matvec_t_acc(&p.w_zh, &da_z, &mut dh_prev);
                matvec_t_acc(&p.w_rh, &da_r, &mut dh_prev);
                matvec_t_acc(&p.w_hh, &dm, &mut dh_prev);
                dh_next = dh_prev;
            }
        }
        _ => {
            return Err(Error::Config(
                "rnn_backward: parameter, gradient and cache kinds differ".into(),
            ))
        }
    }
    Ok(dx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lstm_zero_params() {
        let p = LstmParams::<f64>::zeros(3, 2);
        let (h, c) = lstm_step(&[1.0, -1.0], &[0.0; 3], &[0.0; 3], &p).unwrap();
        assert_eq!(h, vec![0.0; 3]);
        assert_eq!(c, vec![0.0; 3]);

        let cp = [2.0, -4.0, 0.5];
        let (h, c) = lstm_step(&[1.0, -1.0], &[0.3; 3], &cp, &p).unwrap();
        for k in 0..3 {
            assert!((c[k] - 0.5 * cp[k]).abs() < 1e-15);
            assert!((h[k] - 0.5 * (0.5 * cp[k]).tanh()).abs() < 1e-15);
        }
    }

    #[test]
    fn gru_zero_params() {
        let p = GruParams::<f64>::zeros(3, 2);
        let hp = [0.4, -2.0, 1.0];
        let h = gru_step(&[1.0, 5.0], &hp, &p).unwrap();
        for k in 0..3 {
            assert!((h[k] - 0.5 * hp[k]).abs() < 1e-15);
        }
        assert_eq!(gru_step(&[1.0, 5.0], &[0.0; 3], &p).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn step_shape_mismatch() {
        let p = LstmParams::<f64>::zeros(3, 2);
        assert!(lstm_step(&[1.0], &[0.0; 3], &[0.0; 3], &p).is_err());
        let g = GruParams::<f64>::zeros(3, 2);
        assert!(gru_step(&[1.0, 2.0], &[0.0; 2], &g).is_err());
    }

    #[test]
    fn forward_selection_and_single_step() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let p = RnnParams::<f64>::init(RnnKind::Lstm, 3, 2, &mut rng);
        let x = Tensor::from_fn(&[4, 2], |i| (i as f64 * 0.7).sin());

        let (last, cache) = rnn_forward(&x, &[1, 1, 0, 0], &p, false).unwrap();
        assert_eq!(cache.selected_step(), Some(1));
        let (seq, _) = rnn_forward(&x, &[1, 1, 0, 0], &p, true).unwrap();
        assert_eq!(seq.shape(), &[4, 3]);
        assert_eq!(last.data(), seq.row(1));

        let x1 = Tensor::from_fn(&[1, 2], |i| i as f64 + 0.5);
        let (h1, _) = rnn_forward(&x1, &[1], &p, false).unwrap();
        let RnnParams::Lstm(lp) = &p else { unreachable!() };
        let (h, _) = lstm_step(x1.row(0), &[0.0; 3], &[0.0; 3], lp).unwrap();
        assert_eq!(h1.data(), h.as_slice());

        assert!(matches!(rnn_forward(&x, &[0, 0, 0, 0], &p, false), Err(Error::AllMasked)));
    }

    #[test]
    fn zero_lstm_stays_zero_over_time() {
        let p = RnnParams::Lstm(LstmParams::<f64>::zeros(2, 3));
        let x = Tensor::from_fn(&[5, 3], |i| i as f64);
        let (seq, _) = rnn_forward(&x, &[1; 5], &p, true).unwrap();
        assert!(seq.data().iter().all(|&v| v == 0.0));
    }
}
