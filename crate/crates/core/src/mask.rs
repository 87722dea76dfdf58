//! Connectivity masks and the sparse triplet file format.
//!
//! A triplet file starts with the header line `pre post weight` and has one
//! whitespace-separated `pre post weight` row per active connection.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Dense boolean connectivity matrix; row = presynaptic, column = postsynaptic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
    count: usize,
}

impl Mask {
    pub fn new(rows: usize, cols: usize) -> Self {
        Mask { rows, cols, bits: vec![false; rows * cols], count: 0 }
    }

    pub fn square(n: usize) -> Self {
        Self::new(n, n)
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut mask = Mask::square(n);
        for (pre, post) in pairs {
            if pre >= n || post >= n {
                return Err(Error::Domain(format!("pair ({pre}, {post}) outside {n}x{n} mask")));
            }
            mask.insert(pre, post);
        }
        Ok(mask)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of active entries.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    #[inline]
    pub fn get(&self, pre: usize, post: usize) -> bool {
        self.bits[pre * self.cols + post]
    }

    #[inline]
    pub fn get_flat(&self, index: usize) -> bool {
        self.bits[index]
    }

    /// Returns whether the entry was newly activated.
    pub fn insert(&mut self, pre: usize, post: usize) -> bool {
        let bit = &mut self.bits[pre * self.cols + post];
        let added = !*bit;
        *bit = true;
        self.count += added as usize;
        added
    }

    /// Returns whether the entry was active.
    pub fn remove(&mut self, pre: usize, post: usize) -> bool {
        let bit = &mut self.bits[pre * self.cols + post];
        let removed = *bit;
        *bit = false;
        self.count -= removed as usize;
        removed
    }

    /// Active `(pre, post)` pairs in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let cols = self.cols;
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| (i / cols, i % cols))
    }

    /// Active postsynaptic indices of one row.
    pub fn row(&self, pre: usize) -> impl Iterator<Item = usize> + '_ {
        let start = pre * self.cols;
        self.bits[start..start + self.cols].iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j)
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }
}

/// One active connection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triplet {
    pub pre: usize,
    pub post: usize,
    pub weight: f64,
}

pub const TRIPLET_HEADER: &str = "pre post weight";

pub fn write_triplets(path: &Path, triplets: &[Triplet]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "{TRIPLET_HEADER}")?;
        for t in triplets {
            writeln!(out, "{} {} {}", t.pre, t.post, t.weight)?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

pub fn read_triplets(path: &Path) -> Result<Vec<Triplet>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_triplets(&text).map_err(|msg| Error::format(path, msg))
}

fn parse_triplets(text: &str) -> std::result::Result<Vec<Triplet>, String> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.split_whitespace().eq(TRIPLET_HEADER.split_whitespace()) => {}
        Some((_, header)) => return Err(format!("expected header `{TRIPLET_HEADER}`, found `{header}`")),
        None => return Err("empty file (missing header)".into()),
    }
    let mut triplets = Vec::new();
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(format!("line {}: expected 3 fields, found {}", lineno + 1, fields.len()));
        }
        let parse_index = |s: &str| {
            s.parse::<usize>().map_err(|_| format!("line {}: bad index `{s}`", lineno + 1))
        };
        let weight: f64 = fields[2]
            .parse()
            .map_err(|_| format!("line {}: bad weight `{}`", lineno + 1, fields[2]))?;
        if !weight.is_finite() {
            return Err(format!("line {}: non-finite weight", lineno + 1));
        }
        triplets.push(Triplet { pre: parse_index(fields[0])?, post: parse_index(fields[1])?, weight });
    }
    Ok(triplets)
}

/// Builds an `n × n` mask from triplets, rejecting out-of-range and
/// duplicate entries.
pub fn mask_from_triplets(n: usize, triplets: &[Triplet]) -> Result<Mask> {
    let mut mask = Mask::square(n);
    for t in triplets {
        if t.pre >= n || t.post >= n {
            return Err(Error::Domain(format!(
                "connection ({}, {}) outside a {n}-neuron network",
                t.pre, t.post
            )));
        }
        if !mask.insert(t.pre, t.post) {
            return Err(Error::Domain(format!("duplicate connection ({}, {})", t.pre, t.post)));
        }
    }
    Ok(mask)
}

/// Triplets for the active entries of `mask`, weights from a row-major matrix.
pub fn triplets_from(mask: &Mask, weights: Option<&[f64]>) -> Vec<Triplet> {
    mask.iter()
        .map(|(pre, post)| Triplet {
            pre,
            post,
            weight: weights.map_or(1.0, |w| w[pre * mask.cols() + post]),
        })
        .collect()
}
