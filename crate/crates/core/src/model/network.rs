//! Teacher-forced forward/backward passes and incremental decoding state.

use alloc::vec;
use alloc::vec::Vec;

use super::{Architecture, EncodedExample, G2PModel, ModelError, ModelParams};
use crate::lexicon::{BOS, EOS};
use crate::nn::{log_softmax, softmax, softmax_xent, LstmCellParams, LstmState, LstmStepCache, NnError};
use crate::Real;

/// Per-position output distributions and the summed cross-entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct TeacherForced<R> {
    pub distributions: Vec<Vec<R>>,
    pub targets: Vec<usize>,
    pub cross_entropy: f64,
}

struct LayerRun<R> {
    outputs: Vec<Vec<R>>,
    caches: Vec<LstmStepCache<R>>,
    final_state: LstmState<R>,
    reverse: bool,
}

fn run_layer<R: Real>(cell: &LstmCellParams<R>, inputs: &[Vec<R>], reverse: bool, init: LstmState<R>) -> LayerRun<R> {
    let n = inputs.len();
    let mut outputs = vec![Vec::new(); n];
    let mut caches = Vec::with_capacity(n);
    let mut state = init;
    for s in 0..n {
        let t = if reverse { n - 1 - s } else { s };
        let (next, cache) = cell.step(&inputs[t], &state);
        outputs[t] = next.h.clone();
        caches.push(cache);
        state = next;
    }
    LayerRun { outputs, caches, final_state: state, reverse }
}

/// Backpropagates through one unrolled layer. Returns input gradients in time
/// order and the gradient with respect to the initial `(h, c)`.
fn backprop_layer<R: Real>(
    cell: &LstmCellParams<R>,
    run: &LayerRun<R>,
    d_outputs: &[Vec<R>],
    d_final: Option<(Vec<R>, Vec<R>)>,
    grads: &mut LstmCellParams<R>,
) -> (Vec<Vec<R>>, (Vec<R>, Vec<R>)) {
    let n = run.caches.len();
    let hd = cell.hidden_dim();
    let (mut dh, mut dc) = d_final.unwrap_or_else(|| (vec![R::ZERO; hd], vec![R::ZERO; hd]));
    let mut d_inputs = vec![Vec::new(); n];
    for s in (0..n).rev() {
        let t = if run.reverse { n - 1 - s } else { s };
        for (a, b) in dh.iter_mut().zip(&d_outputs[t]) {
            *a += *b;
        }
        let g = cell.backstep(&run.caches[s], &dh, &dc, grads);
        d_inputs[t] = g.dx;
        dh = g.dh_prev;
        dc = g.dc_prev;
    }
    (d_inputs, (dh, dc))
}

fn concat<R: Real>(a: &[R], b: &[R]) -> Vec<R> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

fn add_into<R: Real>(dst: &mut [R], src: &[R]) {
    for (a, b) in dst.iter_mut().zip(src) {
        *a += *b;
    }
}

impl<R: Real> G2PModel<R> {
    fn check_letters(&self, letters: &[usize]) -> Result<(), ModelError> {
        if letters.is_empty() {
            return Err(ModelError::EmptyWord);
        }
        let lv = self.letters.len();
        match letters.iter().find(|&&l| l >= lv) {
            Some(&bad) => Err(NnError::IndexOutOfRange { target: bad, size: lv }.into()),
            None => Ok(()),
        }
    }

    fn check_indices(&self, letters: &[usize], targets: &[usize]) -> Result<(), ModelError> {
        self.check_letters(letters)?;
        let pv = self.phonemes.len();
        if let Some(&bad) = targets.iter().find(|&&p| p >= pv) {
            return Err(NnError::IndexOutOfRange { target: bad, size: pv }.into());
        }
        if self.config.architecture.uses_alignment() && targets.len() != letters.len() + 2 {
            return Err(ModelError::LengthMismatch { letters: letters.len(), outputs: targets.len() });
        }
        if targets.is_empty() {
            return Err(ModelError::LengthMismatch { letters: letters.len(), outputs: 0 });
        }
        Ok(())
    }

    /// Letter-window embeddings for positions `<s> l₁ … l_T </s>`.
    fn window_inputs(&self, letters: &[usize]) -> (Vec<Vec<R>>, Vec<Vec<usize>>) {
        let mut seq = Vec::with_capacity(letters.len() + 2);
        seq.push(BOS);
        seq.extend_from_slice(letters);
        seq.push(EOS);
        let w = self.config.window;
        let mut inputs = Vec::with_capacity(seq.len());
        let mut ids = Vec::with_capacity(seq.len());
        for t in 0..seq.len() {
            let window: Vec<usize> = (0..w).map(|d| seq.get(t + d).copied().unwrap_or(EOS)).collect();
            let mut x = Vec::with_capacity(w * self.config.letter_embedding);
            for &l in &window {
                x.extend_from_slice(self.params.letter_embedding.row(l));
            }
            inputs.push(x);
            ids.push(window);
        }
        (inputs, ids)
    }

    fn logits(&self, h: &[R]) -> Vec<R> {
        let mut z = self.params.output_bias.clone();
        self.params.output_weights.matvec_acc(h, &mut z);
        z
    }

    /// Softmax cross-entropy over the top-layer outputs; returns the loss and,
    /// when `grads` is given, the gradient with respect to each output.
    fn output_loss(
        &self,
        top: &[Vec<R>],
        targets: &[usize],
        mut grads: Option<&mut ModelParams<R>>,
        distributions: Option<&mut Vec<Vec<R>>>,
    ) -> Result<(f64, Vec<Vec<R>>), ModelError> {
        let mut loss = 0.0;
        let mut d_top = Vec::new();
        let mut dists = Vec::new();
        for (h, &target) in top.iter().zip(targets) {
            let logits = self.logits(h);
            let (l, dl) = softmax_xent(&logits, target)?;
            loss += l.to_f64();
            if distributions.is_some() {
                dists.push(softmax(&logits));
            }
            if let Some(g) = grads.as_deref_mut() {
                g.output_weights.outer_acc(&dl, h);
                add_into(&mut g.output_bias, &dl);
                let mut dh = vec![R::ZERO; h.len()];
                self.params.output_weights.matvec_t_acc(&dl, &mut dh);
                d_top.push(dh);
            }
        }
        if let Some(d) = distributions {
            *d = dists;
        }
        Ok((loss, d_top))
    }

    fn scatter_letters(grads: &mut ModelParams<R>, ids: &[Vec<usize>], d_inputs: &[Vec<R>], e: usize) {
        for (window, dx) in ids.iter().zip(d_inputs) {
            for (d, &l) in window.iter().enumerate() {
                add_into(grads.letter_embedding.row_mut(l), &dx[d * e..(d + 1) * e]);
            }
        }
    }

    /// Cross-entropy of `targets` (boundary symbols included) given the word,
    /// accumulating parameter gradients into `grads` when present.
    fn compute(
        &self,
        letters: &[usize],
        targets: &[usize],
        grads: Option<&mut ModelParams<R>>,
        distributions: Option<&mut Vec<Vec<R>>>,
    ) -> Result<f64, ModelError> {
        self.check_indices(letters, targets)?;
        match self.config.architecture {
            Architecture::EncoderDecoder => self.compute_encdec(letters, targets, grads, distributions),
            Architecture::Unidirectional => self.compute_uni(letters, targets, grads, distributions),
            Architecture::Bidirectional => self.compute_bi(letters, targets, grads, distributions),
        }
    }

    fn previous_outputs(targets: &[usize]) -> Vec<usize> {
        let mut prev = Vec::with_capacity(targets.len());
        prev.push(BOS);
        prev.extend_from_slice(&targets[..targets.len() - 1]);
        prev
    }

    fn compute_encdec(
        &self,
        letters: &[usize],
        targets: &[usize],
        mut grads: Option<&mut ModelParams<R>>,
        distributions: Option<&mut Vec<Vec<R>>>,
    ) -> Result<f64, ModelError> {
        let layers = self.config.layers;
        let cells = &self.params.cells;
        let hd = self.config.hidden;
        let enc_ids: Vec<usize> = core::iter::once(BOS).chain(letters.iter().rev().copied()).collect();
        let enc_in: Vec<Vec<R>> = enc_ids.iter().map(|&l| self.params.letter_embedding.row(l).to_vec()).collect();
        let mut enc_runs: Vec<LayerRun<R>> = Vec::with_capacity(layers);
        for k in 0..layers {
            let inputs = if k == 0 { &enc_in } else { &enc_runs[k - 1].outputs };
            let run = run_layer(&cells[k], inputs, false, LstmState::zeros(hd));
            enc_runs.push(run);
        }
        let prev = Self::previous_outputs(targets);
        let dec_in: Vec<Vec<R>> = prev.iter().map(|&p| self.params.phoneme_embedding.row(p).to_vec()).collect();
        let mut dec_runs: Vec<LayerRun<R>> = Vec::with_capacity(layers);
        for k in 0..layers {
            let inputs = if k == 0 { &dec_in } else { &dec_runs[k - 1].outputs };
            let run = run_layer(&cells[layers + k], inputs, false, enc_runs[k].final_state.clone());
            dec_runs.push(run);
        }
        let (loss, d_top) = self.output_loss(&dec_runs[layers - 1].outputs, targets, grads.as_deref_mut(), distributions)?;
        let Some(g) = grads else { return Ok(loss) };

        let mut d_out = d_top;
        let mut d_init = vec![(Vec::new(), Vec::new()); layers];
        for k in (0..layers).rev() {
            let (d_in, d0) = backprop_layer(&cells[layers + k], &dec_runs[k], &d_out, None, &mut g.cells[layers + k]);
            d_init[k] = d0;
            d_out = d_in;
        }
        for (&p, dx) in prev.iter().zip(&d_out) {
            add_into(g.phoneme_embedding.row_mut(p), dx);
        }
        let mut d_out = vec![vec![R::ZERO; hd]; enc_in.len()];
        for k in (0..layers).rev() {
            let d_final = core::mem::take(&mut d_init[k]);
            let (d_in, _) = backprop_layer(&cells[k], &enc_runs[k], &d_out, Some(d_final), &mut g.cells[k]);
            d_out = d_in;
        }
        for (&l, dx) in enc_ids.iter().zip(&d_out) {
            add_into(g.letter_embedding.row_mut(l), dx);
        }
        Ok(loss)
    }

    fn compute_uni(
        &self,
        letters: &[usize],
        targets: &[usize],
        mut grads: Option<&mut ModelParams<R>>,
        distributions: Option<&mut Vec<Vec<R>>>,
    ) -> Result<f64, ModelError> {
        let layers = self.config.layers;
        let cells = &self.params.cells;
        let hd = self.config.hidden;
        let (windows, ids) = self.window_inputs(letters);
        let prev = Self::previous_outputs(targets);
        let inputs: Vec<Vec<R>> = windows
            .iter()
            .zip(&prev)
            .map(|(w, &p)| concat(w, self.params.phoneme_embedding.row(p)))
            .collect();
        let mut runs: Vec<LayerRun<R>> = Vec::with_capacity(layers);
        for k in 0..layers {
            let x = if k == 0 { &inputs } else { &runs[k - 1].outputs };
            let run = run_layer(&cells[k], x, false, LstmState::zeros(hd));
            runs.push(run);
        }
        let (loss, d_top) = self.output_loss(&runs[layers - 1].outputs, targets, grads.as_deref_mut(), distributions)?;
        let Some(g) = grads else { return Ok(loss) };

        let mut d_out = d_top;
        for k in (0..layers).rev() {
            let (d_in, _) = backprop_layer(&cells[k], &runs[k], &d_out, None, &mut g.cells[k]);
            d_out = d_in;
        }
        let split = self.config.window * self.config.letter_embedding;
        for (&p, dx) in prev.iter().zip(&d_out) {
            add_into(g.phoneme_embedding.row_mut(p), &dx[split..]);
        }
        Self::scatter_letters(g, &ids, &d_out, self.config.letter_embedding);
        Ok(loss)
    }

    fn compute_bi(
        &self,
        letters: &[usize],
        targets: &[usize],
        mut grads: Option<&mut ModelParams<R>>,
        distributions: Option<&mut Vec<Vec<R>>>,
    ) -> Result<f64, ModelError> {
        let layers = self.config.layers;
        let cells = &self.params.cells;
        let hd = self.config.hidden;
        let (windows, ids) = self.window_inputs(letters);
        let prev = Self::previous_outputs(targets);
        let fwd_in: Vec<Vec<R>> = windows
            .iter()
            .zip(&prev)
            .map(|(w, &p)| concat(w, self.params.phoneme_embedding.row(p)))
            .collect();
        let mut fwd: Vec<LayerRun<R>> = Vec::with_capacity(layers);
        let mut bwd: Vec<LayerRun<R>> = Vec::with_capacity(layers);
        for k in 0..layers {
            let (f, b) = if k == 0 {
                (
                    run_layer(&cells[0], &fwd_in, false, LstmState::zeros(hd)),
                    run_layer(&cells[layers], &windows, true, LstmState::zeros(hd)),
                )
            } else {
                let joined: Vec<Vec<R>> =
                    fwd[k - 1].outputs.iter().zip(&bwd[k - 1].outputs).map(|(a, b)| concat(a, b)).collect();
                (
                    run_layer(&cells[k], &joined, false, LstmState::zeros(hd)),
                    run_layer(&cells[layers + k], &bwd[k - 1].outputs, true, LstmState::zeros(hd)),
                )
            };
            fwd.push(f);
            bwd.push(b);
        }
        let top_in: Vec<Vec<R>> =
            fwd[layers - 1].outputs.iter().zip(&bwd[layers - 1].outputs).map(|(a, b)| concat(a, b)).collect();
        let top = run_layer(&cells[2 * layers], &top_in, false, LstmState::zeros(hd));
        let (loss, d_top) = self.output_loss(&top.outputs, targets, grads.as_deref_mut(), distributions)?;
        let Some(g) = grads else { return Ok(loss) };

        let (d_top_in, _) = backprop_layer(&cells[2 * layers], &top, &d_top, None, &mut g.cells[2 * layers]);
        let mut d_f: Vec<Vec<R>> = d_top_in.iter().map(|d| d[..hd].to_vec()).collect();
        let mut d_b: Vec<Vec<R>> = d_top_in.iter().map(|d| d[hd..].to_vec()).collect();
        for k in (0..layers).rev() {
            let (df_in, _) = backprop_layer(&cells[k], &fwd[k], &d_f, None, &mut g.cells[k]);
            let (db_in, _) = backprop_layer(&cells[layers + k], &bwd[k], &d_b, None, &mut g.cells[layers + k]);
            if k > 0 {
                d_f = df_in.iter().map(|d| d[..hd].to_vec()).collect();
                d_b = df_in.iter().zip(&db_in).map(|(a, b)| {
                    let mut v = a[hd..].to_vec();
                    add_into(&mut v, b);
                    v
                }).collect();
            } else {
                let split = self.config.window * self.config.letter_embedding;
                for (&p, dx) in prev.iter().zip(&df_in) {
                    add_into(g.phoneme_embedding.row_mut(p), &dx[split..]);
                }
                Self::scatter_letters(g, &ids, &df_in, self.config.letter_embedding);
                Self::scatter_letters(g, &ids, &db_in, self.config.letter_embedding);
            }
        }
        Ok(loss)
    }

    /// Teacher-forced pass over one example: one output distribution per
    /// target position and the summed cross-entropy.
    pub fn forward_teacher_forced(&self, example: &EncodedExample) -> Result<TeacherForced<R>, ModelError> {
        let targets = self.targets(example)?;
        let mut distributions = Vec::new();
        let cross_entropy = self.compute(&example.letters, &targets, None, Some(&mut distributions))?;
        Ok(TeacherForced { distributions, targets, cross_entropy })
    }

    /// Summed cross-entropy of one example and its target count; gradients
    /// are added into `grads`.
    pub fn loss_and_grad(&self, example: &EncodedExample, grads: &mut ModelParams<R>) -> Result<(f64, usize), ModelError> {
        let targets = self.targets(example)?;
        let loss = self.compute(&example.letters, &targets, Some(grads), None)?;
        Ok((loss, targets.len()))
    }

    /// Summed cross-entropy and target count without gradients.
    pub fn loss(&self, example: &EncodedExample) -> Result<(f64, usize), ModelError> {
        let targets = self.targets(example)?;
        Ok((self.compute(&example.letters, &targets, None, None)?, targets.len()))
    }

    /// Log-likelihood of a complete output sequence, boundary symbols
    /// included, exactly as the decoder produces it.
    pub fn score_sequence(&self, letters: &[usize], outputs: &[usize]) -> Result<f64, ModelError> {
        Ok(-self.compute(letters, outputs, None, None)?)
    }

    /// Activations of the backward stack at every position, bottom layer
    /// first. Empty for the other architectures.
    pub fn backward_activations(&self, letters: &[usize]) -> Result<Vec<Vec<Vec<R>>>, ModelError> {
        if self.config.architecture != Architecture::Bidirectional {
            return Ok(Vec::new());
        }
        self.check_letters(letters)?;
        let (windows, _) = self.window_inputs(letters);
        Ok(self.backward_stack(&windows))
    }

    fn backward_stack(&self, windows: &[Vec<R>]) -> Vec<Vec<Vec<R>>> {
        let layers = self.config.layers;
        let hd = self.config.hidden;
        let mut outs: Vec<Vec<Vec<R>>> = Vec::with_capacity(layers);
        for k in 0..layers {
            let inputs = if k == 0 { windows } else { &outs[k - 1][..] };
            let run = run_layer(&self.params.cells[layers + k], inputs, true, LstmState::zeros(hd));
            outs.push(run.outputs);
        }
        outs
    }

    /// Per-word decoding context: encoder states or backward-stack activities
    /// are computed here once.
    pub fn search(&self, word: &[char]) -> Result<ModelSearch<'_, R>, ModelError> {
        let letters = self.encode_word(word)?;
        self.search_encoded(&letters)
    }

    pub fn search_encoded(&self, letters: &[usize]) -> Result<ModelSearch<'_, R>, ModelError> {
        self.check_letters(letters)?;
        let hd = self.config.hidden;
        let layers = self.config.layers;
        match self.config.architecture {
            Architecture::EncoderDecoder => {
                let mut state: Vec<LstmState<R>> = vec![LstmState::zeros(hd); layers];
                let enc_ids = core::iter::once(BOS).chain(letters.iter().rev().copied());
                for l in enc_ids {
                    let mut x = self.params.letter_embedding.row(l).to_vec();
                    for (k, s) in state.iter_mut().enumerate() {
                        let (next, _) = self.params.cells[k].step(&x, s);
                        x = next.h.clone();
                        *s = next;
                    }
                }
                Ok(ModelSearch { model: self, windows: Vec::new(), backward: Vec::new(), init: state, letters: letters.len() })
            }
            Architecture::Unidirectional => {
                let (windows, _) = self.window_inputs(letters);
                Ok(ModelSearch {
                    model: self,
                    windows,
                    backward: Vec::new(),
                    init: vec![LstmState::zeros(hd); layers],
                    letters: letters.len(),
                })
            }
            Architecture::Bidirectional => {
                let (windows, _) = self.window_inputs(letters);
                let backward = self.backward_stack(&windows);
                Ok(ModelSearch {
                    model: self,
                    windows,
                    backward,
                    init: vec![LstmState::zeros(hd); layers + 1],
                    letters: letters.len(),
                })
            }
        }
    }
}

/// Recurrent state carried by one hypothesis: the decoder stack, the
/// uni-directional stack, or the bi-directional forward stack plus top layer.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchState<R> {
    pub layers: Vec<LstmState<R>>,
}

pub struct ModelSearch<'m, R> {
    model: &'m G2PModel<R>,
    windows: Vec<Vec<R>>,
    backward: Vec<Vec<Vec<R>>>,
    init: Vec<LstmState<R>>,
    letters: usize,
}

impl<'m, R: Real> ModelSearch<'m, R> {
    pub fn model(&self) -> &'m G2PModel<R> {
        self.model
    }

    pub fn letter_count(&self) -> usize {
        self.letters
    }

    pub fn initial_state(&self) -> SearchState<R> {
        SearchState { layers: self.init.clone() }
    }

    /// Output log-probabilities at `position` given the previous output
    /// symbol, and the advanced state.
    pub fn step(&self, state: &SearchState<R>, position: usize, prev: usize) -> (Vec<f64>, SearchState<R>) {
        let m = self.model;
        let cells = &m.params.cells;
        let layers = m.config.layers;
        let pe = m.params.phoneme_embedding.row(prev);
        let mut next = Vec::with_capacity(state.layers.len());
        let top_h = match m.config.architecture {
            Architecture::EncoderDecoder => {
                let mut x = pe.to_vec();
                for k in 0..layers {
                    let (s, _) = cells[layers + k].step(&x, &state.layers[k]);
                    x = s.h.clone();
                    next.push(s);
                }
                x
            }
            Architecture::Unidirectional => {
                let mut x = concat(&self.windows[position], pe);
                for k in 0..layers {
                    let (s, _) = cells[k].step(&x, &state.layers[k]);
                    x = s.h.clone();
                    next.push(s);
                }
                x
            }
            Architecture::Bidirectional => {
                let mut x = concat(&self.windows[position], pe);
                for k in 0..layers {
                    let (s, _) = cells[k].step(&x, &state.layers[k]);
                    x = concat(&s.h, &self.backward[k][position]);
                    next.push(s);
                }
                let (s, _) = cells[2 * layers].step(&x, &state.layers[layers]);
                let h = s.h.clone();
                next.push(s);
                h
            }
        };
        let logp = log_softmax(&m.logits(&top_h)).into_iter().map(Real::to_f64).collect();
        (logp, SearchState { layers: next })
    }
}
