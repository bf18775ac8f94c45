//! Dense frame-major feature matrices, the currency between the front-end
//! and the quantizers.

use crate::error::{CodecError, Result};

/// A `frames x dims` grid of real-valued coefficients, row-major.
///
/// Rows are time frames, columns are feature dimensions. All stored values
/// are finite; `dims` is always positive, `frames` may be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    frames: usize,
    dims: usize,
    values: Vec<f32>,
}

impl FeatureMatrix {
    /// Builds a matrix from row-major values, validating shape and finiteness.
    pub fn new(frames: usize, dims: usize, values: Vec<f32>) -> Result<Self> {
        if dims == 0 {
            return Err(CodecError::Config(
                "feature matrix must have at least one dimension".into(),
            ));
        }
        if values.len() != frames * dims {
            return Err(CodecError::Shape(format!(
                "feature matrix expects {frames}x{dims} = {} values, got {}",
                frames * dims,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(CodecError::Domain(format!(
                "feature matrix value at flat index {pos} is not finite"
            )));
        }
        Ok(Self {
            frames,
            dims,
            values,
        })
    }

    /// An all-zero matrix.
    pub fn zeros(frames: usize, dims: usize) -> Self {
        assert!(dims > 0, "feature matrix needs at least one dimension");
        Self {
            frames,
            dims,
            values: vec![0.0; frames * dims],
        }
    }

    /// Internal constructor for values produced by codec arithmetic, which
    /// stays finite by construction. Shape is still enforced.
    pub(crate) fn from_computed(frames: usize, dims: usize, values: Vec<f32>) -> Self {
        debug_assert!(dims > 0);
        debug_assert_eq!(values.len(), frames * dims);
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self {
            frames,
            dims,
            values,
        }
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Row `t` as a dims-length slice.
    pub fn row(&self, t: usize) -> &[f32] {
        &self.values[t * self.dims..(t + 1) * self.dims]
    }

    pub(crate) fn row_mut(&mut self, t: usize) -> &mut [f32] {
        &mut self.values[t * self.dims..(t + 1) * self.dims]
    }

    /// Copies a contiguous column range `[start, start+width)` into a new matrix.
    pub fn column_slice(&self, start: usize, width: usize) -> Self {
        assert!(width > 0 && start + width <= self.dims);
        let mut values = Vec::with_capacity(self.frames * width);
        for t in 0..self.frames {
            values.extend_from_slice(&self.row(t)[start..start + width]);
        }
        Self {
            frames: self.frames,
            dims: width,
            values,
        }
    }

    /// Stacks matrices along the frame axis. All parts must agree on dims.
    pub fn concat_frames(parts: &[FeatureMatrix]) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(CodecError::EmptyInput(
                "cannot concatenate zero feature matrices".into(),
            ));
        };
        let dims = first.dims;
        if let Some(bad) = parts.iter().find(|p| p.dims != dims) {
            return Err(CodecError::Shape(format!(
                "dimension mismatch in frame concat: {} vs {}",
                dims, bad.dims
            )));
        }
        let frames = parts.iter().map(|p| p.frames).sum();
        let mut values = Vec::with_capacity(frames * dims);
        for p in parts {
            values.extend_from_slice(&p.values);
        }
        Ok(Self {
            frames,
            dims,
            values,
        })
    }

    /// Concatenates matrices along the feature dimension. All parts must
    /// agree on frame count.
    pub fn concat_dims(parts: &[FeatureMatrix]) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(CodecError::EmptyInput(
                "cannot concatenate zero feature matrices".into(),
            ));
        };
        let frames = first.frames;
        if let Some(bad) = parts.iter().find(|p| p.frames != frames) {
            return Err(CodecError::Shape(format!(
                "frame count mismatch in concat: {} vs {}",
                frames, bad.frames
            )));
        }
        let dims: usize = parts.iter().map(|p| p.dims).sum();
        let mut values = Vec::with_capacity(frames * dims);
        for t in 0..frames {
            for p in parts {
                values.extend_from_slice(p.row(t));
            }
        }
        Ok(Self {
            frames,
            dims,
            values,
        })
    }
}
