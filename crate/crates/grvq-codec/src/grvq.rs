//! Group-residual vector quantization: the feature dimensions are split into
//! equal contiguous groups and each group runs an independent residual
//! quantizer cascade. Group outputs are concatenated to form the final
//! reconstruction, so a one-group model degenerates to plain residual VQ.

use crate::error::{CodecError, Result};
use crate::feature::FeatureMatrix;
use crate::seed::mix_seed;
use crate::vq::{
    ema_update, kmeans_init, quantize_batch, reinit_dead_entries, Codebook,
    DEAD_ENTRY_THRESHOLD,
};

/// An ordered cascade of codebooks; stage `i` quantizes the residual left by
/// stages `0..i`, and stage outputs sum to the reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct RvqStack {
    codebooks: Vec<Codebook>,
}

impl RvqStack {
    /// Validates uniform dimension and entry count across stages.
    pub fn new(codebooks: Vec<Codebook>) -> Result<Self> {
        let Some(first) = codebooks.first() else {
            return Err(CodecError::Config(
                "a residual stack needs at least one codebook".into(),
            ));
        };
        let (dim, entries) = (first.dim(), first.len());
        for (i, cb) in codebooks.iter().enumerate() {
            if cb.dim() != dim {
                return Err(CodecError::Shape(format!(
                    "stage {i} dimension {} differs from stage 0 dimension {dim}",
                    cb.dim()
                )));
            }
            if cb.len() != entries {
                return Err(CodecError::Config(format!(
                    "stage {i} has {} entries, stage 0 has {entries}; stacks are uniform",
                    cb.len()
                )));
            }
        }
        Ok(Self { codebooks })
    }

    pub fn stages(&self) -> usize {
        self.codebooks.len()
    }

    pub fn dim(&self) -> usize {
        self.codebooks[0].dim()
    }

    pub fn entries(&self) -> usize {
        self.codebooks[0].len()
    }

    pub fn codebook(&self, stage: usize) -> &Codebook {
        &self.codebooks[stage]
    }
}

/// A trained group-residual quantizer plus the front-end geometry it was
/// trained for.
#[derive(Debug, Clone, PartialEq)]
pub struct GrvqModel {
    groups: Vec<RvqStack>,
    frame_size: usize,
    sample_rate: u32,
}

impl GrvqModel {
    /// Validates that groups agree on dimension, stage count and entry count.
    pub fn new(groups: Vec<RvqStack>, frame_size: usize, sample_rate: u32) -> Result<Self> {
        let Some(first) = groups.first() else {
            return Err(CodecError::Config("a model needs at least one group".into()));
        };
        let (dim, stages, entries) = (first.dim(), first.stages(), first.entries());
        for (g, stack) in groups.iter().enumerate() {
            if stack.dim() != dim || stack.stages() != stages || stack.entries() != entries {
                return Err(CodecError::Config(format!(
                    "group {g} shape ({}, {} stages, {} entries) differs from group 0 \
                     ({dim}, {stages} stages, {entries} entries)",
                    stack.dim(),
                    stack.stages(),
                    stack.entries()
                )));
            }
        }
        Ok(Self {
            groups,
            frame_size,
            sample_rate,
        })
    }

    pub fn groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, g: usize) -> &RvqStack {
        &self.groups[g]
    }

    pub fn stages(&self) -> usize {
        self.groups[0].stages()
    }

    pub fn entries(&self) -> usize {
        self.groups[0].entries()
    }

    pub fn group_dim(&self) -> usize {
        self.groups[0].dim()
    }

    pub fn total_dim(&self) -> usize {
        self.group_dim() * self.groups.len()
    }

    /// Total codebook count `G * N_q`.
    pub fn n_codebooks(&self) -> usize {
        self.groups.len() * self.stages()
    }

    pub fn frame_size(&self) -> usize {
        self.frame_size
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }
}

/// Integer codes for `frames` frames, `groups * stages` codes per frame in
/// group-major, stage-minor order: `[g0s0, g0s1, ..., g1s0, g1s1, ...]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeTensor {
    frames: usize,
    codes_per_frame: usize,
    codes: Vec<u32>,
}

impl CodeTensor {
    pub fn new(frames: usize, codes_per_frame: usize, codes: Vec<u32>) -> Result<Self> {
        if codes_per_frame == 0 {
            return Err(CodecError::Config(
                "codes per frame must be positive".into(),
            ));
        }
        if codes.len() != frames * codes_per_frame {
            return Err(CodecError::Shape(format!(
                "expected {frames}x{codes_per_frame} = {} codes, got {}",
                frames * codes_per_frame,
                codes.len()
            )));
        }
        Ok(Self {
            frames,
            codes_per_frame,
            codes,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn codes_per_frame(&self) -> usize {
        self.codes_per_frame
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn frame(&self, t: usize) -> &[u32] {
        &self.codes[t * self.codes_per_frame..(t + 1) * self.codes_per_frame]
    }
}

/// Splits features into `g` equal-width contiguous column blocks; their
/// in-order concatenation reproduces the input exactly.
pub fn split_groups(features: &FeatureMatrix, g: usize) -> Result<Vec<FeatureMatrix>> {
    if g == 0 {
        return Err(CodecError::Config("group count must be >= 1".into()));
    }
    if !features.dims().is_multiple_of(g) {
        return Err(CodecError::Config(format!(
            "feature dimension {} is not divisible into {g} equal groups",
            features.dims()
        )));
    }
    let width = features.dims() / g;
    Ok((0..g)
        .map(|k| features.column_slice(k * width, width))
        .collect())
}

/// Output of one residual cascade over a batch.
#[derive(Debug, Clone)]
pub struct RvqOutcome {
    /// `frames x stages` code grid, row-major.
    pub codes: Vec<u32>,
    pub quantized: FeatureMatrix,
    /// RMS of the residual after each stage, over all frames and dims.
    pub residual_norms: Vec<f64>,
}

/// Greedy stage-wise residual quantization of every row in `features`.
pub fn rvq_apply(stack: &RvqStack, features: &FeatureMatrix) -> Result<RvqOutcome> {
    if features.dims() != stack.dim() {
        return Err(CodecError::Shape(format!(
            "feature dimension {} does not match stack dimension {}",
            features.dims(),
            stack.dim()
        )));
    }
    let frames = features.frames();
    let dim = stack.dim();
    let stages = stack.stages();
    let mut residual = features.clone();
    let mut quantized = FeatureMatrix::zeros(frames, dim);
    let mut codes = vec![0u32; frames * stages];
    let mut residual_norms = Vec::with_capacity(stages);
    for (stage_idx, codebook) in stack.codebooks.iter().enumerate() {
        let mut sq_sum = 0.0f64;
        for t in 0..frames {
            let (e, _) = codebook.nearest(residual.row(t));
            codes[t * stages + stage_idx] = e as u32;
            let entry = codebook.entry(e);
            let q_row = quantized.row_mut(t);
            for (q, &v) in q_row.iter_mut().zip(entry) {
                *q += v;
            }
            let r_row = residual.row_mut(t);
            for (r, &v) in r_row.iter_mut().zip(entry) {
                *r -= v;
            }
            for &r in residual.row(t) {
                sq_sum += r as f64 * r as f64;
            }
        }
        let cells = (frames * dim) as f64;
        residual_norms.push(if cells > 0.0 {
            (sq_sum / cells).sqrt()
        } else {
            0.0
        });
    }
    Ok(RvqOutcome {
        codes,
        quantized,
        residual_norms,
    })
}

/// Full group-residual pass: split, quantize each group independently,
/// concatenate reconstructions, and lay codes out group-major.
pub fn grvq_apply(model: &GrvqModel, features: &FeatureMatrix) -> Result<(CodeTensor, FeatureMatrix)> {
    if features.dims() != model.total_dim() {
        return Err(CodecError::Shape(format!(
            "feature dimension {} does not match model dimension {}",
            features.dims(),
            model.total_dim()
        )));
    }
    let parts = split_groups(features, model.groups())?;
    let stages = model.stages();
    let frames = features.frames();
    let per_frame = model.n_codebooks();
    let mut codes = vec![0u32; frames * per_frame];
    let mut quantized_parts = Vec::with_capacity(model.groups());
    for (g, part) in parts.iter().enumerate() {
        let outcome = rvq_apply(model.group(g), part)?;
        for t in 0..frames {
            let dst = &mut codes[t * per_frame + g * stages..t * per_frame + (g + 1) * stages];
            dst.copy_from_slice(&outcome.codes[t * stages..(t + 1) * stages]);
        }
        quantized_parts.push(outcome.quantized);
    }
    let quantized = FeatureMatrix::concat_dims(&quantized_parts)?;
    Ok((CodeTensor::new(frames, per_frame, codes)?, quantized))
}

/// Reconstructs features from codes by summing the addressed entries per
/// group and stage, in the same order the encoder accumulated them.
pub fn grvq_decode(model: &GrvqModel, codes: &CodeTensor) -> Result<FeatureMatrix> {
    let per_frame = model.n_codebooks();
    if codes.codes_per_frame() != per_frame {
        return Err(CodecError::Shape(format!(
            "code tensor has {} codes per frame, model expects {per_frame}",
            codes.codes_per_frame()
        )));
    }
    let frames = codes.frames();
    let group_dim = model.group_dim();
    let stages = model.stages();
    let entries = model.entries();
    let mut values = vec![0.0f32; frames * model.total_dim()];
    for t in 0..frames {
        let frame_codes = codes.frame(t);
        for g in 0..model.groups() {
            let base = t * model.total_dim() + g * group_dim;
            let out = &mut values[base..base + group_dim];
            for s in 0..stages {
                let code = frame_codes[g * stages + s];
                if code as usize >= entries {
                    return Err(CodecError::InvalidCode {
                        frame: t,
                        group: g,
                        stage: s,
                        code,
                        entries,
                    });
                }
                let entry = model.group(g).codebook(s).entry(code as usize);
                for (o, &v) in out.iter_mut().zip(entry) {
                    *o += v;
                }
            }
        }
    }
    Ok(FeatureMatrix::from_computed(
        frames,
        model.total_dim(),
        values,
    ))
}

/// Sum over groups, stages and frames of the squared distance between each
/// stage's input residual and the entry chosen for it.
pub fn commitment_loss(features: &FeatureMatrix, model: &GrvqModel) -> Result<f64> {
    if features.dims() != model.total_dim() {
        return Err(CodecError::Shape(format!(
            "feature dimension {} does not match model dimension {}",
            features.dims(),
            model.total_dim()
        )));
    }
    let parts = split_groups(features, model.groups())?;
    let mut loss = 0.0f64;
    for (g, part) in parts.iter().enumerate() {
        let stack = model.group(g);
        let mut residual = part.clone();
        for codebook in &stack.codebooks {
            for t in 0..residual.frames() {
                let (e, d2) = codebook.nearest(residual.row(t));
                loss += d2;
                let entry = codebook.entry(e);
                let row = residual.row_mut(t);
                for (r, &v) in row.iter_mut().zip(entry) {
                    *r -= v;
                }
            }
        }
    }
    Ok(loss)
}

/// Analytic gradient of the first-stage commitment term with assignments
/// frozen: `2 * (z - q(z))` per group, concatenated back to full width.
pub fn first_stage_gradient(features: &FeatureMatrix, model: &GrvqModel) -> Result<FeatureMatrix> {
    if features.dims() != model.total_dim() {
        return Err(CodecError::Shape(format!(
            "feature dimension {} does not match model dimension {}",
            features.dims(),
            model.total_dim()
        )));
    }
    let parts = split_groups(features, model.groups())?;
    let mut grads = Vec::with_capacity(parts.len());
    for (g, part) in parts.iter().enumerate() {
        let codebook = model.group(g).codebook(0);
        let mut values = Vec::with_capacity(part.frames() * part.dims());
        for t in 0..part.frames() {
            let row = part.row(t);
            let (e, _) = codebook.nearest(row);
            let entry = codebook.entry(e);
            for (&z, &q) in row.iter().zip(entry) {
                values.push(2.0 * (z - q));
            }
        }
        grads.push(FeatureMatrix::from_computed(
            part.frames(),
            part.dims(),
            values,
        ));
    }
    FeatureMatrix::concat_dims(&grads)
}

/// Compares the analytic first-stage gradient against central finite
/// differences with step `h`, holding code assignments fixed. Returns the
/// maximum relative discrepancy over all frames and coordinates (relative to
/// the larger magnitude, floored at 1e-6 to keep near-zero coordinates from
/// dominating).
///
/// Every frame must sit away from quantization boundaries: the distance to
/// the second-nearest entry must exceed `10 * h` at every stage.
pub fn commitment_grad_check(
    features: &FeatureMatrix,
    model: &GrvqModel,
    h: f64,
) -> Result<f64> {
    if h <= 0.0 || !h.is_finite() {
        return Err(CodecError::Config(format!(
            "finite positive step size required, got {h}"
        )));
    }
    let parts = split_groups(features, model.groups())?;
    // Boundary-proximity precondition at every stage of every group.
    for (g, part) in parts.iter().enumerate() {
        let stack = model.group(g);
        let mut residual = part.clone();
        for (s, codebook) in stack.codebooks.iter().enumerate() {
            for t in 0..residual.frames() {
                let row = residual.row(t);
                let mut best = f64::INFINITY;
                let mut second = f64::INFINITY;
                for e in 0..codebook.len() {
                    let mut d2 = 0.0f64;
                    let entry = codebook.entry(e);
                    for (&a, &b) in row.iter().zip(entry) {
                        let d = a as f64 - b as f64;
                        d2 += d * d;
                    }
                    if d2 < best {
                        second = best;
                        best = d2;
                    } else if d2 < second {
                        second = d2;
                    }
                }
                if codebook.len() > 1 && second.sqrt() <= 10.0 * h {
                    return Err(CodecError::Degenerate(format!(
                        "frame {t} is too close to a quantization boundary at group {g} \
                         stage {s}: second-nearest distance {} <= 10h = {}",
                        second.sqrt(),
                        10.0 * h
                    )));
                }
                let (e, _) = codebook.nearest(row);
                let entry = codebook.entry(e);
                let row = residual.row_mut(t);
                for (r, &v) in row.iter_mut().zip(entry) {
                    *r -= v;
                }
            }
        }
    }

    let analytic = first_stage_gradient(features, model)?;
    let group_dim = model.group_dim();
    let mut max_rel = 0.0f64;
    for (g, part) in parts.iter().enumerate() {
        let codebook = model.group(g).codebook(0);
        for t in 0..part.frames() {
            let row = part.row(t);
            let (e, _) = codebook.nearest(row);
            let entry: Vec<f64> = codebook.entry(e).iter().map(|&v| v as f64).collect();
            let z: Vec<f64> = row.iter().map(|&v| v as f64).collect();
            for j in 0..z.len() {
                let eval = |zj: f64| -> f64 {
                    let mut acc = 0.0f64;
                    for (d, (&zv, &qv)) in z.iter().zip(&entry).enumerate() {
                        let v = if d == j { zj } else { zv };
                        let diff = v - qv;
                        acc += diff * diff;
                    }
                    acc
                };
                let fd = (eval(z[j] + h) - eval(z[j] - h)) / (2.0 * h);
                let a = analytic.row(t)[g * group_dim + j] as f64;
                let denom = a.abs().max(fd.abs()).max(1e-6);
                let rel = (a - fd).abs() / denom;
                if rel > max_rel {
                    max_rel = rel;
                }
            }
        }
    }
    Ok(max_rel)
}

/// Everything [`fit_grvq`] measured while training one stage.
#[derive(Debug, Clone)]
pub struct StageReport {
    pub group: usize,
    pub stage: usize,
    /// Batch MSE measured with the codebook entering each epoch.
    pub epoch_mse: Vec<f64>,
    /// Batch MSE of the finished stage.
    pub final_mse: f64,
    /// Shannon entropy (bits) of the final assignment histogram.
    pub usage_entropy_bits: f64,
    /// Dead entries refreshed across all epochs.
    pub reinit_count: usize,
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub stages: Vec<StageReport>,
    /// Mean squared reconstruction error of the finished model on the
    /// training data, per matrix cell.
    pub final_mse: f64,
}

/// Training configuration for [`fit_grvq`]. Defaults: two groups of two
/// stages with 1024 entries each, seeded k-means++ initialization refined by
/// EMA epochs.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub groups: usize,
    pub stages: usize,
    pub entries: usize,
    pub epochs: usize,
    pub decay: f32,
    pub seed: u64,
    pub kmeans_iters: usize,
    /// Upper bound on rows fed to k-means initialization; the full data still
    /// drives every EMA epoch. 0 disables subsampling.
    pub kmeans_sample_cap: usize,
    /// Pins entry 0 of every stage >= 2 codebook to the zero vector, making
    /// residual norms non-increasing across stages.
    pub reserve_zero_entry: bool,
    pub frame_size: usize,
    pub sample_rate: u32,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            groups: 2,
            stages: 2,
            entries: crate::vq::DEFAULT_ENTRIES,
            epochs: 8,
            decay: crate::vq::DEFAULT_EMA_DECAY,
            seed: 42,
            kmeans_iters: crate::vq::DEFAULT_KMEANS_ITERS,
            kmeans_sample_cap: 6144,
            reserve_zero_entry: false,
            frame_size: 480,
            sample_rate: 24000,
        }
    }
}

/// Trains a group-residual model stage by stage: each stage's codebook is
/// k-means-initialized on the residual left by the frozen earlier stages,
/// then EMA-refined with dead-entry recovery. Deterministic in `config.seed`.
pub fn fit_grvq(data: &FeatureMatrix, config: &FitConfig) -> Result<(GrvqModel, FitReport)> {
    if config.groups == 0 || config.stages == 0 {
        return Err(CodecError::Config(
            "groups and stages must both be >= 1".into(),
        ));
    }
    if data.frames() < config.entries {
        return Err(CodecError::InsufficientData(format!(
            "training needs at least {} frames for {} entries, got {}",
            config.entries,
            config.entries,
            data.frames()
        )));
    }
    let parts = split_groups(data, config.groups)?;
    let group_dim = parts[0].dims();
    let zero = vec![0.0f32; group_dim];
    let mut groups = Vec::with_capacity(config.groups);
    let mut stage_reports = Vec::new();
    for (g, part) in parts.iter().enumerate() {
        let mut residual = part.clone();
        let mut codebooks = Vec::with_capacity(config.stages);
        for s in 0..config.stages {
            let stage_seed = mix_seed(config.seed, (g as u64) << 32 | s as u64);
            let init_data = subsample_rows(
                &residual,
                config.kmeans_sample_cap,
                config.entries,
                mix_seed(stage_seed, u64::MAX),
            );
            let mut codebook =
                kmeans_init(&init_data, config.entries, config.kmeans_iters, stage_seed)?;
            let pin_zero = config.reserve_zero_entry && s >= 1;
            if pin_zero {
                codebook.pin_entry(0, &zero);
            }
            let mut epoch_mse = Vec::with_capacity(config.epochs);
            let mut reinit_count = 0usize;
            for epoch in 0..config.epochs {
                let (indices, quantized) = quantize_batch(&codebook, &residual)?;
                epoch_mse.push(batch_mse(&residual, &quantized));
                codebook = ema_update(&codebook, &residual, &indices, config.decay)?;
                let (refreshed, n) = reinit_dead_entries(
                    &codebook,
                    &residual,
                    DEAD_ENTRY_THRESHOLD,
                    mix_seed(stage_seed, epoch as u64),
                )?;
                codebook = refreshed;
                reinit_count += n;
                if pin_zero {
                    codebook.pin_entry(0, &zero);
                }
            }
            let (indices, quantized) = quantize_batch(&codebook, &residual)?;
            let final_mse = batch_mse(&residual, &quantized);
            stage_reports.push(StageReport {
                group: g,
                stage: s,
                epoch_mse,
                final_mse,
                usage_entropy_bits: usage_entropy_bits(&indices, config.entries),
                reinit_count,
            });
            for t in 0..residual.frames() {
                let q = quantized.row(t).to_vec();
                let row = residual.row_mut(t);
                for (r, qv) in row.iter_mut().zip(q) {
                    *r -= qv;
                }
            }
            codebooks.push(codebook);
        }
        groups.push(RvqStack::new(codebooks)?);
    }
    let model = GrvqModel::new(groups, config.frame_size, config.sample_rate)?;
    let (_, reconstruction) = grvq_apply(&model, data)?;
    let final_mse = batch_mse(data, &reconstruction);
    Ok((
        model,
        FitReport {
            stages: stage_reports,
            final_mse,
        },
    ))
}

/// Deterministically samples up to `max(cap, floor)` rows without
/// replacement, preserving temporal order. `cap == 0` means no cap.
fn subsample_rows(data: &FeatureMatrix, cap: usize, floor: usize, seed: u64) -> FeatureMatrix {
    if cap == 0 {
        return data.clone();
    }
    let take = cap.max(floor);
    if data.frames() <= take {
        return data.clone();
    }
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut picks: Vec<usize> = rand::seq::index::sample(&mut rng, data.frames(), take).into_vec();
    picks.sort_unstable();
    let mut values = Vec::with_capacity(take * data.dims());
    for &t in &picks {
        values.extend_from_slice(data.row(t));
    }
    FeatureMatrix::from_computed(take, data.dims(), values)
}

fn batch_mse(reference: &FeatureMatrix, quantized: &FeatureMatrix) -> f64 {
    let cells = reference.values().len();
    if cells == 0 {
        return 0.0;
    }
    let mut acc = 0.0f64;
    for (&a, &b) in reference.values().iter().zip(quantized.values()) {
        let d = a as f64 - b as f64;
        acc += d * d;
    }
    acc / cells as f64
}

/// Shannon entropy (bits) of a code histogram.
fn usage_entropy_bits(indices: &[u32], entries: usize) -> f64 {
    if indices.is_empty() {
        return 0.0;
    }
    let mut counts = vec![0usize; entries];
    for &i in indices {
        counts[i as usize] += 1;
    }
    let n = indices.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}
