use super::dense::no_cache;
use super::Params;
use crate::error::{Error, Result};
use crate::nn::activation::sigmoid;
use crate::nn::gemm::{gemm_nn, gemm_nt, gemm_tn};
use crate::nn::init::{fill_uniform, uniform_limit};
use crate::nn::{Activation, Scalar, Tensor};
use crate::rng::Prng;

pub const DEFAULT_MASK_VALUE: f64 = -10.0;

/// Peephole LSTM over `[T, F]` samples.
///
/// Gates are stacked in the order input, forget, output, candidate:
///
/// ```text
/// i = σ(Wxi x + Whi h' + Wci c' + bi)
/// f = σ(Wxf x + Whf h' + Wcf c' + bf)
/// g = tanh(Wxc x + Whc h' + bc)
/// c = f c' + i g
/// o = σ(Wxo x + Who h' + Wco c + bo)
/// h = o tanh(c)
/// ```
///
/// A time step whose features all equal `mask_value` is skipped: state passes
/// through and the step repeats the previous output.
///
/// Parameter layout: `Wx [4H x F]`, `Wh [4H x H]`, `Wc [3H x H]` (i, f, o), `b [4H]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lstm<T> {
    pub features: usize,
    pub hidden: usize,
    pub return_sequences: bool,
    pub mask_value: f64,
    pub params: Params<T>,
    cache: Option<Cache<T>>,
}

#[derive(Debug, Clone, PartialEq)]
struct Step<T> {
    x: Vec<T>,
    h_prev: Vec<T>,
    c_prev: Vec<T>,
    gates: Vec<T>,
    c: Vec<T>,
    masked: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
struct Cache<T> {
    batch: usize,
    steps: Vec<Step<T>>,
}

struct Offsets {
    wh: usize,
    wc: usize,
    b: usize,
    end: usize,
}

impl<T: Scalar> Lstm<T> {
    fn offsets(features: usize, hidden: usize) -> Offsets {
        let wh = 4 * hidden * features;
        let wc = wh + 4 * hidden * hidden;
        let b = wc + 3 * hidden * hidden;
        Offsets {
            wh,
            wc,
            b,
            end: b + 4 * hidden,
        }
    }

    pub fn param_len(features: usize, hidden: usize) -> usize {
        Self::offsets(features, hidden).end
    }

    pub fn new(features: usize, hidden: usize, return_sequences: bool, rng: &mut Prng) -> Self {
        let o = Self::offsets(features, hidden);
        let mut params = Params::zeros(o.end);
        let v = &mut params.values;
        let lim_x = uniform_limit(Activation::Tanh, features, 4 * hidden);
        let lim_h = uniform_limit(Activation::Tanh, hidden, 4 * hidden);
        let lim_c = uniform_limit(Activation::Tanh, hidden, 3 * hidden);
        fill_uniform(&mut v[..o.wh], lim_x, rng);
        fill_uniform(&mut v[o.wh..o.wc], lim_h, rng);
        fill_uniform(&mut v[o.wc..o.b], lim_c, rng);
        v[o.b + hidden..o.b + 2 * hidden].fill(T::one());
        Self::with_params(features, hidden, return_sequences, params)
    }

    pub fn from_params(features: usize, hidden: usize, return_sequences: bool, values: Vec<T>) -> Result<Self> {
        let want = Self::param_len(features, hidden);
        if values.len() != want {
            return Err(Error::ShapeMismatch(format!(
                "lstm({features}, {hidden}) needs {want} parameters, got {}",
                values.len()
            )));
        }
        Ok(Self::with_params(features, hidden, return_sequences, Params::new(values)))
    }

    fn with_params(features: usize, hidden: usize, return_sequences: bool, params: Params<T>) -> Self {
        Self {
            features,
            hidden,
            return_sequences,
            mask_value: DEFAULT_MASK_VALUE,
            params,
            cache: None,
        }
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        match input {
            [t, f] if *f == self.features => Ok(if self.return_sequences {
                vec![*t, self.hidden]
            } else {
                vec![self.hidden]
            }),
            _ => Err(Error::ShapeMismatch(format!(
                "lstm expects [T, {}], got {input:?}",
                self.features
            ))),
        }
    }

    fn dims(&self, x: &Tensor<T>) -> Result<(usize, usize)> {
        match x.shape() {
            [b, t, f] if *f == self.features && *t > 0 => Ok((*b, *t)),
            s => Err(Error::ShapeMismatch(format!(
                "lstm expects [B, T, {}], got {s:?}",
                self.features
            ))),
        }
    }

    /// One step on a batch. `gates` receives post-activation i, f, o, g per row.
    fn step_batch(&self, x: &[T], h_prev: &[T], c_prev: &[T], batch: usize, gates: &mut [T], c: &mut [T]) {
        let (f, h) = (self.features, self.hidden);
        let o = Self::offsets(f, h);
        let v = &self.params.values;
        for row in gates.chunks_exact_mut(4 * h) {
            row.copy_from_slice(&v[o.b..o.end]);
        }
        gemm_nt(batch, f, 4 * h, x, &v[..o.wh], gates);
        gemm_nt(batch, h, 4 * h, h_prev, &v[o.wh..o.wc], gates);
        let wc = &v[o.wc..o.b];
        let mut peep = vec![T::zero(); batch * 2 * h];
        gemm_nt(batch, h, 2 * h, c_prev, &wc[..2 * h * h], &mut peep);
        for r in 0..batch {
            let g = &mut gates[r * 4 * h..(r + 1) * 4 * h];
            let p = &peep[r * 2 * h..(r + 1) * 2 * h];
            for j in 0..h {
                g[j] = sigmoid(g[j] + p[j]);
                g[h + j] = sigmoid(g[h + j] + p[h + j]);
                g[3 * h + j] = g[3 * h + j].tanh();
                c[r * h + j] = g[h + j] * c_prev[r * h + j] + g[j] * g[3 * h + j];
            }
        }
        let mut peep_o = vec![T::zero(); batch * h];
        gemm_nt(batch, h, h, c, &wc[2 * h * h..], &mut peep_o);
        for r in 0..batch {
            for j in 0..h {
                let idx = r * 4 * h + 2 * h + j;
                gates[idx] = sigmoid(gates[idx] + peep_o[r * h + j]);
            }
        }
    }

    /// Single unmasked step for one sample; returns `(h_t, c_t)`.
    pub fn step(&self, x: &[T], h_prev: &[T], c_prev: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        let h = self.hidden;
        if x.len() != self.features || h_prev.len() != h || c_prev.len() != h {
            return Err(Error::ShapeMismatch(format!(
                "lstm step expects x[{}], h[{h}], c[{h}]",
                self.features
            )));
        }
        let mut gates = vec![T::zero(); 4 * h];
        let mut c = vec![T::zero(); h];
        self.step_batch(x, h_prev, c_prev, 1, &mut gates, &mut c);
        let hs = (0..h).map(|j| gates[2 * h + j] * c[j].tanh()).collect();
        Ok((hs, c))
    }

    fn run(&self, x: &Tensor<T>, mut record: Option<&mut Vec<Step<T>>>) -> Result<Tensor<T>> {
        let (b, t) = self.dims(x)?;
        let (f, h) = (self.features, self.hidden);
        let mask = T::cast(self.mask_value);
        let mut hs = vec![T::zero(); b * h];
        let mut cs = vec![T::zero(); b * h];
        let mut out = Vec::with_capacity(if self.return_sequences { b * t * h } else { b * h });
        let mut seq = if self.return_sequences { vec![T::zero(); b * t * h] } else { Vec::new() };
        for step in 0..t {
            let mut xt = Vec::with_capacity(b * f);
            let mut masked = Vec::with_capacity(b);
            for s in 0..b {
                let row = &x.sample(s)[step * f..(step + 1) * f];
                masked.push(row.iter().all(|&v| v == mask));
                xt.extend_from_slice(row);
            }
            let mut gates = vec![T::zero(); b * 4 * h];
            let mut c = vec![T::zero(); b * h];
            self.step_batch(&xt, &hs, &cs, b, &mut gates, &mut c);
            let mut h_new = vec![T::zero(); b * h];
            for s in 0..b {
                for j in 0..h {
                    let k = s * h + j;
                    if masked[s] {
                        c[k] = cs[k];
                        h_new[k] = hs[k];
                    } else {
                        h_new[k] = gates[s * 4 * h + 2 * h + j] * c[k].tanh();
                    }
                }
            }
            if self.return_sequences {
                for s in 0..b {
                    seq[(s * t + step) * h..(s * t + step + 1) * h].copy_from_slice(&h_new[s * h..(s + 1) * h]);
                }
            }
            let h_prev = std::mem::replace(&mut hs, h_new);
            let c_prev = std::mem::replace(&mut cs, c.clone());
            if let Some(rec) = record.as_deref_mut() {
                rec.push(Step {
                    x: xt,
                    h_prev,
                    c_prev,
                    gates,
                    c,
                    masked,
                });
            }
        }
        if self.return_sequences {
            Tensor::from_vec(&[b, t, h], seq)
        } else {
            out.extend_from_slice(&hs);
            Tensor::from_vec(&[b, h], out)
        }
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        self.run(x, None)
    }

    pub fn forward_train(&mut self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let mut steps = Vec::new();
        let y = self.run(x, Some(&mut steps))?;
        self.cache = Some(Cache {
            batch: x.batch(),
            steps,
        });
        Ok(y)
    }

    /// Backpropagation through time over the cached sequence.
    pub fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        let cache = self.cache.as_ref().ok_or_else(no_cache)?;
        let (f, h) = (self.features, self.hidden);
        let b = cache.batch;
        let t = cache.steps.len();
        let o = Self::offsets(f, h);
        let v = &self.params.values;
        let (wx, wh, wc) = (&v[..o.wh], &v[o.wh..o.wc], &v[o.wc..o.b]);
        let g = &mut self.params.grads;
        let mut dx = vec![T::zero(); b * t * f];
        let mut dh = vec![T::zero(); b * h];
        let mut dc_next = vec![T::zero(); b * h];
        if !self.return_sequences {
            dh.copy_from_slice(grad.data());
        }
        let mut dpre = vec![T::zero(); b * 4 * h];
        for step in (0..t).rev() {
            let st = &cache.steps[step];
            if self.return_sequences {
                for s in 0..b {
                    let src = &grad.data()[(s * t + step) * h..(s * t + step + 1) * h];
                    for (d, &gv) in dh[s * h..(s + 1) * h].iter_mut().zip(src) {
                        *d += gv;
                    }
                }
            }
            let mut dc = vec![T::zero(); b * h];
            dpre.fill(T::zero());
            for s in 0..b {
                if st.masked[s] {
                    continue;
                }
                let gs = &st.gates[s * 4 * h..(s + 1) * 4 * h];
                for j in 0..h {
                    let k = s * h + j;
                    let og = gs[2 * h + j];
                    let tc = st.c[k].tanh();
                    let d_o = dh[k] * tc * og * (T::one() - og);
                    dpre[s * 4 * h + 2 * h + j] = d_o;
                    dc[k] = dc_next[k] + dh[k] * og * (T::one() - tc * tc);
                }
            }
            // output-gate peephole reads c_t
            let dpre_o: Vec<T> = (0..b)
                .flat_map(|s| dpre[s * 4 * h + 2 * h..s * 4 * h + 3 * h].to_vec())
                .collect();
            gemm_nn(b, h, h, &dpre_o, &wc[2 * h * h..], &mut dc);
            gemm_tn(h, b, h, &dpre_o, &st.c, &mut g[o.wc + 2 * h * h..o.b]);
            for s in 0..b {
                if st.masked[s] {
                    continue;
                }
                let gs = &st.gates[s * 4 * h..(s + 1) * 4 * h];
                for j in 0..h {
                    let k = s * h + j;
                    let (i, fg, cand) = (gs[j], gs[h + j], gs[3 * h + j]);
                    let row = &mut dpre[s * 4 * h..(s + 1) * 4 * h];
                    row[j] = dc[k] * cand * i * (T::one() - i);
                    row[h + j] = dc[k] * st.c_prev[k] * fg * (T::one() - fg);
                    row[3 * h + j] = dc[k] * i * (T::one() - cand * cand);
                }
            }
            // parameter gradients
            gemm_tn(4 * h, b, f, &dpre, &st.x, &mut g[..o.wh]);
            gemm_tn(4 * h, b, h, &dpre, &st.h_prev, &mut g[o.wh..o.wc]);
            let dpre_if: Vec<T> = (0..b)
                .flat_map(|s| dpre[s * 4 * h..s * 4 * h + 2 * h].to_vec())
                .collect();
            gemm_tn(2 * h, b, h, &dpre_if, &st.c_prev, &mut g[o.wc..o.wc + 2 * h * h]);
            for row in dpre.chunks_exact(4 * h) {
                for (gb, &d) in g[o.b..o.end].iter_mut().zip(row) {
                    *gb += d;
                }
            }
            // input gradient
            let mut dxt = vec![T::zero(); b * f];
            gemm_nn(b, 4 * h, f, &dpre, wx, &mut dxt);
            for s in 0..b {
                dx[(s * t + step) * f..(s * t + step + 1) * f].copy_from_slice(&dxt[s * f..(s + 1) * f]);
            }
            // state gradients for the previous step
            let mut dh_prev = vec![T::zero(); b * h];
            gemm_nn(b, 4 * h, h, &dpre, wh, &mut dh_prev);
            let mut dc_prev = vec![T::zero(); b * h];
            gemm_nn(b, 2 * h, h, &dpre_if, &wc[..2 * h * h], &mut dc_prev);
            for s in 0..b {
                for j in 0..h {
                    let k = s * h + j;
                    if st.masked[s] {
                        dh_prev[k] = dh[k];
                        dc_prev[k] = dc_next[k];
                    } else {
                        dc_prev[k] += dc[k] * st.gates[s * 4 * h + h + j];
                    }
                }
            }
            dh = dh_prev;
            dc_next = dc_prev;
        }
        Tensor::from_vec(&[b, t, f], dx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian, prng};

    fn sig(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    #[test]
    fn zero_weights_halve_the_cell() {
        let lstm = Lstm::from_params(3, 2, false, vec![0.0f64; Lstm::<f64>::param_len(3, 2)]).unwrap();
        let c_prev = [0.8, -2.0];
        let (h, c) = lstm.step(&[1.0, 2.0, 3.0], &[0.3, 0.4], &c_prev).unwrap();
        for j in 0..2 {
            assert!((c[j] - 0.5 * c_prev[j]).abs() < 1e-15);
            assert!((h[j] - 0.5 * (0.5 * c_prev[j]).tanh()).abs() < 1e-15);
        }
    }

    #[test]
    fn step_matches_gate_formulas() {
        let (f, n) = (3usize, 4usize);
        let mut rng = prng(77);
        let mut r = || 0.5 * gaussian(&mut rng);
        let mat = |rows: usize, cols: usize, r: &mut dyn FnMut() -> f64| -> Vec<Vec<f64>> {
            (0..rows).map(|_| (0..cols).map(|_| r()).collect()).collect()
        };
        let (wxi, wxf, wxo, wxc) = (mat(n, f, &mut r), mat(n, f, &mut r), mat(n, f, &mut r), mat(n, f, &mut r));
        let (whi, whf, who, whc) = (mat(n, n, &mut r), mat(n, n, &mut r), mat(n, n, &mut r), mat(n, n, &mut r));
        let (wci, wcf, wco) = (mat(n, n, &mut r), mat(n, n, &mut r), mat(n, n, &mut r));
        let bias = mat(4, n, &mut r);
        let x: Vec<f64> = (0..f).map(|_| r()).collect();
        let hp: Vec<f64> = (0..n).map(|_| r()).collect();
        let cp: Vec<f64> = (0..n).map(|_| r()).collect();

        let mv = |m: &Vec<Vec<f64>>, v: &[f64]| -> Vec<f64> {
            m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
        };
        let add3 = |a: Vec<f64>, b: Vec<f64>, c: Vec<f64>, d: &Vec<f64>| -> Vec<f64> {
            (0..a.len()).map(|k| a[k] + b[k] + c[k] + d[k]).collect()
        };
        let it: Vec<f64> = add3(mv(&wxi, &x), mv(&whi, &hp), mv(&wci, &cp), &bias[0]).into_iter().map(sig).collect();
        let ft: Vec<f64> = add3(mv(&wxf, &x), mv(&whf, &hp), mv(&wcf, &cp), &bias[1]).into_iter().map(sig).collect();
        let ct_cand: Vec<f64> = add3(mv(&wxc, &x), mv(&whc, &hp), vec![0.0; n], &bias[3]).into_iter().map(f64::tanh).collect();
        let ct: Vec<f64> = (0..n).map(|k| ft[k] * cp[k] + it[k] * ct_cand[k]).collect();
        let ot: Vec<f64> = add3(mv(&wxo, &x), mv(&who, &hp), mv(&wco, &ct), &bias[2]).into_iter().map(sig).collect();
        let ht: Vec<f64> = (0..n).map(|k| ot[k] * ct[k].tanh()).collect();

        let mut values = Vec::new();
        for m in [&wxi, &wxf, &wxo, &wxc, &whi, &whf, &who, &whc, &wci, &wcf, &wco] {
            values.extend(m.iter().flatten());
        }
        values.extend(bias.iter().flatten());
        let lstm = Lstm::from_params(f, n, false, values).unwrap();
        let (h, c) = lstm.step(&x, &hp, &cp).unwrap();
        for k in 0..n {
            assert!((h[k] - ht[k]).abs() < 1e-12);
            assert!((c[k] - ct[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn masked_steps_are_skipped() {
        let lstm = Lstm::<f64>::new(2, 3, true, &mut prng(1));
        let x = Tensor::from_vec(&[1, 3, 2], vec![0.5, -0.2, -10.0, -10.0, 0.1, 0.9]).unwrap();
        let y = lstm.forward(&x).unwrap();
        assert_eq!(&y.data()[0..3], &y.data()[3..6]);
        let short = Tensor::from_vec(&[1, 2, 2], vec![0.5, -0.2, 0.1, 0.9]).unwrap();
        let y2 = Lstm { return_sequences: false, ..lstm.clone() }.forward(&short).unwrap();
        assert!(y.data()[6..].iter().zip(y2.data()).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn forget_bias_starts_at_one() {
        let lstm = Lstm::<f32>::new(2, 3, false, &mut prng(1));
        let o = Lstm::<f32>::offsets(2, 3);
        assert_eq!(&lstm.params.values[o.b..o.b + 3], &[0.0; 3]);
        assert_eq!(&lstm.params.values[o.b + 3..o.b + 6], &[1.0; 3]);
    }
}
