//! Second-order Volterra input expansion.
//!
//! The regressor and kernel share one canonical layout of length
//! `L = M(M+3)/2`:
//!
//! ```text
//! [ x(n), x(n-1), ..., x(n-M+1),                     linear block, M entries
//!   x(n)x(n), x(n)x(n-1), ..., x(n-M+1)x(n-M+1) ]    quadratic block, m1 <= m2
//! ```
//!
//! Quadratic pairs `(m1, m2)` are ordered lexicographically with `m1 <= m2`,
//! so each cross term appears exactly once.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Number of coefficients of a second-order Volterra filter with linear memory `m`.
pub fn expanded_length(memory: usize) -> Result<usize> {
    if memory == 0 {
        return Err(Error::InvalidArgument(
            "memory length must be at least 1".into(),
        ));
    }
    Ok(memory * (memory + 3) / 2)
}

/// Index of the quadratic term `(m1, m2)`, `m1 <= m2`, inside the expanded vector.
pub fn quadratic_index(memory: usize, m1: usize, m2: usize) -> usize {
    debug_assert!(m1 <= m2 && m2 < memory);
    // rows r < m1 hold M - r entries each
    let row_start = m1 * (2 * memory - m1 + 1) / 2;
    memory + row_start + (m2 - m1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VolterraConfig {
    memory: usize,
    expanded: usize,
}

impl VolterraConfig {
    pub fn new(memory: usize) -> Result<Self> {
        Ok(Self {
            memory,
            expanded: expanded_length(memory)?,
        })
    }

    /// Linear memory `M`.
    pub fn memory(&self) -> usize {
        self.memory
    }

    /// Expanded length `L`.
    pub fn expanded_len(&self) -> usize {
        self.expanded
    }
}

/// The last `M` input samples, newest first. Starts from zero pre-history.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayLine {
    samples: Vec<f64>,
}

impl DelayLine {
    pub fn new(config: VolterraConfig) -> Self {
        Self {
            samples: vec![0.0; config.memory()],
        }
    }

    pub fn memory(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Shifts `x_new` into the front of the window.
    pub fn push(&mut self, x_new: f64) -> Result<()> {
        if !x_new.is_finite() {
            return Err(Error::InvalidInput(format!(
                "non-finite input sample {x_new}"
            )));
        }
        self.samples.rotate_right(1);
        self.samples[0] = x_new;
        Ok(())
    }

    /// Writes the canonical expansion of the current window into `out`.
    pub fn expand_into(&self, out: &mut [f64]) {
        let m = self.samples.len();
        debug_assert_eq!(out.len(), m * (m + 3) / 2);
        let (linear, quadratic) = out.split_at_mut(m);
        linear.copy_from_slice(&self.samples);
        let mut k = 0;
        for (i, &a) in self.samples.iter().enumerate() {
            for &b in &self.samples[i..] {
                quadratic[k] = a * b;
                k += 1;
            }
        }
    }

    pub fn expand(&self) -> ExpandedInput {
        let m = self.samples.len();
        let mut values = vec![0.0; m * (m + 3) / 2];
        self.expand_into(&mut values);
        ExpandedInput { values }
    }

    /// Pushes a sample and returns the expansion of the updated window.
    pub fn push_and_expand(&mut self, x_new: f64) -> Result<ExpandedInput> {
        self.push(x_new)?;
        Ok(self.expand())
    }
}

/// Expanded regressor `x(n)` in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedInput {
    values: Vec<f64>,
}

impl ExpandedInput {
    pub fn from_vec(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl AsRef<[f64]> for ExpandedInput {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Volterra coefficient vector in the same canonical order as [`ExpandedInput`].
#[derive(Debug, Clone, PartialEq)]
pub struct KernelVector {
    values: Vec<f64>,
}

impl KernelVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
        }
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Builds a kernel from its linear block `h1` and a quadratic generator
    /// `h2(m1, m2)` evaluated for `m1 <= m2`.
    pub fn from_kernels(h1: &[f64], mut h2: impl FnMut(usize, usize) -> f64) -> Self {
        let m = h1.len();
        let mut values = h1.to_vec();
        for m1 in 0..m {
            for m2 in m1..m {
                values.push(h2(m1, m2));
            }
        }
        Self { values }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Linear memory `M` implied by the length, if the length is a valid `L`.
    pub fn memory(&self) -> Option<usize> {
        (1..=self.values.len()).find(|&m| m * (m + 3) / 2 == self.values.len())
    }

    /// Reads a plant file: a `M=<int>` header followed by `L` coefficients,
    /// one per line. Blank lines and lines starting with `#` are skipped.
    pub fn read_plant_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_plant(&text, &path.display().to_string())
    }
}

impl AsRef<[f64]> for KernelVector {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Parses plant-file text. `origin` is used in error messages.
pub fn parse_plant(text: &str, origin: &str) -> Result<KernelVector> {
    let err = |line: usize, message: String| Error::PlantParse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| err(1, "missing `M=<int>` header".into()))?;
    let memory: usize = header
        .strip_prefix("M=")
        .ok_or_else(|| {
            err(
                header_line,
                format!("expected `M=<int>` header, found `{header}`"),
            )
        })?
        .trim()
        .parse()
        .map_err(|e| err(header_line, format!("bad memory length: {e}")))?;
    let expected = expanded_length(memory).map_err(|e| err(header_line, e.to_string()))?;

    let mut values = Vec::with_capacity(expected);
    let mut last_line = header_line;
    for (line, content) in lines {
        last_line = line;
        if values.len() == expected {
            return Err(err(
                line,
                format!("too many coefficients: M={memory} requires {expected}"),
            ));
        }
        let v: f64 = content
            .parse()
            .map_err(|e| err(line, format!("bad coefficient `{content}`: {e}")))?;
        if !v.is_finite() {
            return Err(err(line, format!("non-finite coefficient `{content}`")));
        }
        values.push(v);
    }
    if values.len() != expected {
        return Err(err(
            last_line,
            format!(
                "expected {expected} coefficients for M={memory}, found {}",
                values.len()
            ),
        ));
    }
    Ok(KernelVector { values })
}

impl fmt::Display for KernelVector {
    /// Plant-file representation.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "M={}", self.memory().unwrap_or(0))?;
        for v in &self.values {
            writeln!(f, "{v:e}")?;
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Filter output `y = h^T x`.
pub fn filter_output(h: &KernelVector, x: &ExpandedInput) -> Result<f64> {
    if h.len() != x.len() {
        return Err(Error::InvalidArgument(format!(
            "kernel length {} does not match input length {}",
            h.len(),
            x.len()
        )));
    }
    Ok(dot(h.as_slice(), x.as_slice()))
}
