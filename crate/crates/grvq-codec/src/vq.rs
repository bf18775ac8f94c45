//! Single-codebook vector quantization: nearest-neighbor search, seeded
//! k-means initialization, EMA codebook refinement, dead-entry recovery.
//!
//! Distances are squared L2 accumulated in f64, ties broken toward the
//! lowest entry index so encodings are platform-deterministic.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{CodecError, Result};
use crate::feature::FeatureMatrix;

/// Default entry count: 10 bits per code.
pub const DEFAULT_ENTRIES: usize = 1024;
/// Default Lloyd iteration count for k-means initialization.
pub const DEFAULT_KMEANS_ITERS: usize = 25;
/// Default EMA decay for codebook refinement.
pub const DEFAULT_EMA_DECAY: f32 = 0.99;
/// Laplace floor applied to EMA counts before division.
pub const LAPLACE_EPS: f64 = 1e-5;
/// Entries with an EMA count below this are considered dead.
pub const DEAD_ENTRY_THRESHOLD: f32 = 1.0;

/// A set of `len x dim` quantizer entries plus the EMA statistics that
/// produced them.
///
/// Invariant: `entries[e] == ema_sums[e] / max(ema_counts[e], LAPLACE_EPS)`
/// bit-exactly; every update path recomputes entries through that expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    dim: usize,
    entries: Vec<f32>,
    /// f64 image of `entries`, kept in lockstep so distance scans avoid
    /// per-element conversion. Values are exact widenings; results match
    /// converting on the fly bit for bit.
    entries_wide: Vec<f64>,
    ema_counts: Vec<f32>,
    ema_sums: Vec<f32>,
    epoch: u64,
}

impl Codebook {
    /// Wraps entry vectors with fresh statistics (count 1, sum = entry).
    pub fn from_entries(dim: usize, entries: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(CodecError::Config("entry dimension must be >= 1".into()));
        }
        if entries.is_empty() || !entries.len().is_multiple_of(dim) {
            return Err(CodecError::Shape(format!(
                "entry data length {} is not a positive multiple of dim {dim}",
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(CodecError::Domain(format!(
                "codebook entry value at flat index {pos} is not finite"
            )));
        }
        let ema_sums = entries.clone();
        let ema_counts = vec![1.0; entries.len() / dim];
        let entries_wide = entries.iter().map(|&v| v as f64).collect();
        Ok(Self {
            dim,
            entries,
            entries_wide,
            ema_counts,
            ema_sums,
            epoch: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.ema_counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ema_counts.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, e: usize) -> &[f32] {
        &self.entries[e * self.dim..(e + 1) * self.dim]
    }

    pub fn entries(&self) -> &[f32] {
        &self.entries
    }

    pub fn ema_counts(&self) -> &[f32] {
        &self.ema_counts
    }

    pub fn ema_sums(&self) -> &[f32] {
        &self.ema_sums
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    /// Squared L2 distance between `vector` and entry `e`, f64-accumulated.
    fn dist2(&self, e: usize, vector: &[f32]) -> f64 {
        let entry = &self.entries_wide[e * self.dim..(e + 1) * self.dim];
        let mut acc = 0.0f64;
        for (&a, &b) in vector.iter().zip(entry) {
            let d = a as f64 - b;
            acc += d * d;
        }
        acc
    }

    /// Index and squared distance of the nearest entry; lowest index wins ties.
    ///
    /// Scans four entries per pass with independent accumulators; each
    /// entry's sum runs in dimension order, so results are bit-identical to
    /// a one-entry-at-a-time scan.
    pub(crate) fn nearest(&self, vector: &[f32]) -> (usize, f64) {
        let dim = self.dim;
        let n = self.len();
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        let vector = &vector[..dim];
        let mut e = 0usize;
        while e + 4 <= n {
            let base = e * dim;
            let c0 = &self.entries_wide[base..base + dim];
            let c1 = &self.entries_wide[base + dim..base + 2 * dim];
            let c2 = &self.entries_wide[base + 2 * dim..base + 3 * dim];
            let c3 = &self.entries_wide[base + 3 * dim..base + 4 * dim];
            let (mut d0, mut d1, mut d2, mut d3) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            for i in 0..dim {
                let v = vector[i] as f64;
                let x0 = v - c0[i];
                let x1 = v - c1[i];
                let x2 = v - c2[i];
                let x3 = v - c3[i];
                d0 += x0 * x0;
                d1 += x1 * x1;
                d2 += x2 * x2;
                d3 += x3 * x3;
            }
            for (j, d) in [d0, d1, d2, d3].into_iter().enumerate() {
                if d < best_d {
                    best_d = d;
                    best = e + j;
                }
            }
            e += 4;
        }
        while e < n {
            let d = self.dist2(e, vector);
            if d < best_d {
                best_d = d;
                best = e;
            }
            e += 1;
        }
        (best, best_d)
    }

    /// Pins entry `e` to the given vector with fresh statistics.
    pub(crate) fn pin_entry(&mut self, e: usize, vector: &[f32]) {
        debug_assert_eq!(vector.len(), self.dim);
        self.entries[e * self.dim..(e + 1) * self.dim].copy_from_slice(vector);
        for (w, &v) in self.entries_wide[e * self.dim..(e + 1) * self.dim]
            .iter_mut()
            .zip(vector)
        {
            *w = v as f64;
        }
        self.ema_sums[e * self.dim..(e + 1) * self.dim].copy_from_slice(vector);
        self.ema_counts[e] = 1.0;
    }
}

/// Index of the codebook entry nearest to `vector` in squared L2.
pub fn nearest_code(codebook: &Codebook, vector: &[f32]) -> Result<usize> {
    if vector.len() != codebook.dim {
        return Err(CodecError::Shape(format!(
            "vector dimension {} does not match codebook dimension {}",
            vector.len(),
            codebook.dim
        )));
    }
    if let Some(pos) = vector.iter().position(|v| !v.is_finite()) {
        return Err(CodecError::Domain(format!(
            "query vector component {pos} is not finite"
        )));
    }
    Ok(codebook.nearest(vector).0)
}

/// Quantizes every row of `features`, returning per-row entry indices and
/// the matrix of selected entries.
pub fn quantize_batch(
    codebook: &Codebook,
    features: &FeatureMatrix,
) -> Result<(Vec<u32>, FeatureMatrix)> {
    if features.dims() != codebook.dim {
        return Err(CodecError::Shape(format!(
            "feature dimension {} does not match codebook dimension {}",
            features.dims(),
            codebook.dim
        )));
    }
    let frames = features.frames();
    let mut indices = Vec::with_capacity(frames);
    let mut values = Vec::with_capacity(frames * codebook.dim);
    for t in 0..frames {
        let (e, _) = codebook.nearest(features.row(t));
        indices.push(e as u32);
        values.extend_from_slice(codebook.entry(e));
    }
    Ok((
        indices,
        FeatureMatrix::from_computed(frames, codebook.dim, values),
    ))
}

/// Per-iteration Lloyd objective (sum of squared distances to the nearest
/// center, evaluated before that iteration's center update).
#[derive(Debug, Clone)]
pub struct KmeansTrace {
    pub objective_per_iter: Vec<f64>,
}

/// k-means++ seeding followed by Lloyd iterations; deterministic in `seed`.
pub fn kmeans_init(
    data: &FeatureMatrix,
    n_entries: usize,
    iterations: usize,
    seed: u64,
) -> Result<Codebook> {
    kmeans_init_traced(data, n_entries, iterations, seed).map(|(cb, _)| cb)
}

/// [`kmeans_init`] variant that also reports the objective trace.
pub fn kmeans_init_traced(
    data: &FeatureMatrix,
    n_entries: usize,
    iterations: usize,
    seed: u64,
) -> Result<(Codebook, KmeansTrace)> {
    if n_entries == 0 {
        return Err(CodecError::Config("n_entries must be >= 1".into()));
    }
    if iterations == 0 {
        return Err(CodecError::Config("iterations must be >= 1".into()));
    }
    let frames = data.frames();
    let dim = data.dims();
    if frames < n_entries {
        return Err(CodecError::InsufficientData(format!(
            "k-means needs at least {n_entries} rows, got {frames}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // k-means++ seeding: weight each candidate by squared distance to the
    // nearest already-chosen center.
    let mut centers = vec![0.0f64; n_entries * dim];
    let mut chosen = Vec::with_capacity(n_entries);
    let first = rng.gen_range(0..frames);
    chosen.push(first);
    copy_row(&mut centers, 0, data.row(first));
    let mut d2: Vec<f64> = (0..frames)
        .map(|t| dist2_to_center(data.row(t), &centers[..dim]))
        .collect();
    for c in 1..n_entries {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut cum = 0.0f64;
            let mut pick = frames - 1;
            for (t, &w) in d2.iter().enumerate() {
                cum += w;
                if cum > target {
                    pick = t;
                    break;
                }
            }
            pick
        } else {
            // All remaining mass is zero (duplicated points); fall back to a
            // uniform draw.
            rng.gen_range(0..frames)
        };
        chosen.push(pick);
        copy_row(&mut centers, c, data.row(pick));
        let center = center_row(&centers, c, dim).to_vec();
        for (t, slot) in d2.iter_mut().enumerate() {
            let d = dist2_to_center(data.row(t), &center);
            if d < *slot {
                *slot = d;
            }
        }
    }

    // Lloyd refinement; empty clusters keep their previous center.
    let mut assignment = vec![0usize; frames];
    let mut objective_per_iter = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let mut objective = 0.0f64;
        for (t, slot) in assignment.iter_mut().enumerate() {
            let (best, best_d) = nearest_center(data.row(t), &centers, n_entries, dim);
            *slot = best;
            objective += best_d;
        }
        objective_per_iter.push(objective);

        let mut sums = vec![0.0f64; n_entries * dim];
        let mut counts = vec![0usize; n_entries];
        for (t, &e) in assignment.iter().enumerate() {
            counts[e] += 1;
            let sum = &mut sums[e * dim..(e + 1) * dim];
            for (s, &v) in sum.iter_mut().zip(data.row(t)) {
                *s += v as f64;
            }
        }
        for e in 0..n_entries {
            if counts[e] > 0 {
                let sum = &sums[e * dim..(e + 1) * dim];
                let target = &mut centers[e * dim..(e + 1) * dim];
                for (c, &s) in target.iter_mut().zip(sum) {
                    *c = s / counts[e] as f64;
                }
            }
        }
    }

    let entries: Vec<f32> = centers.iter().map(|&v| v as f32).collect();
    let codebook = Codebook::from_entries(dim, entries)?;
    Ok((codebook, KmeansTrace { objective_per_iter }))
}

fn copy_row(centers: &mut [f64], e: usize, row: &[f32]) {
    let dim = row.len();
    for (c, &v) in centers[e * dim..(e + 1) * dim].iter_mut().zip(row) {
        *c = v as f64;
    }
}

fn center_row(centers: &[f64], e: usize, dim: usize) -> &[f64] {
    &centers[e * dim..(e + 1) * dim]
}

fn dist2_to_center(row: &[f32], center: &[f64]) -> f64 {
    let mut acc = 0.0f64;
    for (&a, &b) in row.iter().zip(center) {
        let d = a as f64 - b;
        acc += d * d;
    }
    acc
}

/// Blocked argmin over f64 centers; per-center sums run in dimension order,
/// matching [`dist2_to_center`] bit for bit. Lowest index wins ties.
fn nearest_center(row: &[f32], centers: &[f64], n_entries: usize, dim: usize) -> (usize, f64) {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    let mut e = 0usize;
    let row = &row[..dim];
    while e + 4 <= n_entries {
        let base = e * dim;
        let c0 = &centers[base..base + dim];
        let c1 = &centers[base + dim..base + 2 * dim];
        let c2 = &centers[base + 2 * dim..base + 3 * dim];
        let c3 = &centers[base + 3 * dim..base + 4 * dim];
        let (mut d0, mut d1, mut d2, mut d3) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for i in 0..dim {
            let v = row[i] as f64;
            let x0 = v - c0[i];
            let x1 = v - c1[i];
            let x2 = v - c2[i];
            let x3 = v - c3[i];
            d0 += x0 * x0;
            d1 += x1 * x1;
            d2 += x2 * x2;
            d3 += x3 * x3;
        }
        for (j, d) in [d0, d1, d2, d3].into_iter().enumerate() {
            if d < best_d {
                best_d = d;
                best = e + j;
            }
        }
        e += 4;
    }
    while e < n_entries {
        let d = dist2_to_center(row, center_row(centers, e, dim));
        if d < best_d {
            best_d = d;
            best = e;
        }
        e += 1;
    }
    (best, best_d)
}

/// Folds a batch of assigned vectors into the codebook's EMA statistics and
/// recomputes every entry as `sums / max(counts, LAPLACE_EPS)`.
pub fn ema_update(
    codebook: &Codebook,
    batch: &FeatureMatrix,
    indices: &[u32],
    decay: f32,
) -> Result<Codebook> {
    if !(0.0..=1.0).contains(&decay) {
        return Err(CodecError::Config(format!(
            "EMA decay must lie in [0, 1], got {decay}"
        )));
    }
    if batch.dims() != codebook.dim {
        return Err(CodecError::Shape(format!(
            "batch dimension {} does not match codebook dimension {}",
            batch.dims(),
            codebook.dim
        )));
    }
    if indices.len() != batch.frames() {
        return Err(CodecError::Shape(format!(
            "got {} indices for {} batch rows",
            indices.len(),
            batch.frames()
        )));
    }
    let n = codebook.len();
    if let Some(&bad) = indices.iter().find(|&&i| i as usize >= n) {
        return Err(CodecError::Index(format!(
            "assignment index {bad} out of range for {n} entries"
        )));
    }

    let dim = codebook.dim;
    let mut batch_counts = vec![0.0f64; n];
    let mut batch_sums = vec![0.0f64; n * dim];
    for (t, &e) in indices.iter().enumerate() {
        let e = e as usize;
        batch_counts[e] += 1.0;
        let sum = &mut batch_sums[e * dim..(e + 1) * dim];
        for (s, &v) in sum.iter_mut().zip(batch.row(t)) {
            *s += v as f64;
        }
    }

    let decay = decay as f64;
    let keep = 1.0 - decay;
    let mut out = codebook.clone();
    // Five parallel arrays are indexed by entry here; a range loop reads best.
    #[allow(clippy::needless_range_loop)]
    for e in 0..n {
        let count = decay * codebook.ema_counts[e] as f64 + keep * batch_counts[e];
        out.ema_counts[e] = count as f32;
        for d in 0..dim {
            let i = e * dim + d;
            let sum = decay * codebook.ema_sums[i] as f64 + keep * batch_sums[i];
            out.ema_sums[i] = sum as f32;
            out.entries[i] = (out.ema_sums[i] as f64 / (out.ema_counts[e] as f64).max(LAPLACE_EPS))
                as f32;
            out.entries_wide[i] = out.entries[i] as f64;
        }
    }
    out.epoch = codebook.epoch + 1;
    Ok(out)
}

/// Replaces entries whose EMA count fell below `usage_threshold` with batch
/// rows sampled without replacement. Returns the refreshed codebook and how
/// many entries were replaced.
pub fn reinit_dead_entries(
    codebook: &Codebook,
    batch: &FeatureMatrix,
    usage_threshold: f32,
    seed: u64,
) -> Result<(Codebook, usize)> {
    if batch.frames() == 0 {
        return Err(CodecError::EmptyInput(
            "dead-entry reinit needs a non-empty batch".into(),
        ));
    }
    if batch.dims() != codebook.dim {
        return Err(CodecError::Shape(format!(
            "batch dimension {} does not match codebook dimension {}",
            batch.dims(),
            codebook.dim
        )));
    }
    let dead: Vec<usize> = (0..codebook.len())
        .filter(|&e| codebook.ema_counts[e] < usage_threshold)
        .collect();
    if dead.is_empty() {
        return Ok((codebook.clone(), 0));
    }
    let take = dead.len().min(batch.frames());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, batch.frames(), take);
    let mut out = codebook.clone();
    for (slot, row) in dead.iter().zip(picks.iter()) {
        out.pin_entry(*slot, batch.row(row));
    }
    Ok((out, take))
}
