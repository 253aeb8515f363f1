//! The deletion channel, its modified and perturbed variants, and the
//! run / super-run / parent-run segmentations used to analyse it.

use rand::Rng;
use serde::Serialize;

use crate::error::{check_probability, Error, Result};
use crate::rng::{stream, Purpose};
use crate::sources::BinarySequence;

/// One channel use: input, deletion mask (1 = deleted) and output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeletionRealization {
    pub x: BinarySequence,
    pub mask: BinarySequence,
    pub y: BinarySequence,
}

impl DeletionRealization {
    /// Builds a realization from an input and a mask, deriving the output.
    pub fn from_mask(x: BinarySequence, mask: BinarySequence) -> Result<Self> {
        let y = apply_mask(&x, &mask)?;
        Ok(Self { x, mask, y })
    }

    /// Re-interleaves the output with the deleted bits; always equals `x`.
    pub fn reconstruct(&self) -> BinarySequence {
        let mut out = Vec::with_capacity(self.x.len());
        let mut ys = self.y.bits().iter();
        for (&b, &m) in self.x.bits().iter().zip(self.mask.bits()) {
            out.push(if m == 1 { b } else { *ys.next().expect("output shorter than mask implies") });
        }
        BinarySequence::from_bits_unchecked(out)
    }
}

/// A maximal block of equal bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Run {
    pub value: u8,
    pub len: usize,
}

/// Shape of a super-run: the leading run's length and the total length of the
/// length-one runs that follow it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SuperRunType {
    pub l_rep: usize,
    pub l_alt: usize,
}

impl SuperRunType {
    pub fn len(&self) -> usize {
        self.l_rep + self.l_alt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Parent-run blocks: `y_blocks[j]` is the output run produced by `x_blocks[j]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParentSegmentation {
    pub x_blocks: Vec<String>,
    pub y_blocks: Vec<String>,
    /// `|X(1)|, ..., |X(M-1)|`.
    pub k: Vec<usize>,
}

fn check_lengths(x: &BinarySequence, mask: &BinarySequence) -> Result<()> {
    if x.len() != mask.len() {
        return Err(Error::LengthMismatch {
            what: "mask",
            got: mask.len(),
            expected: x.len(),
        });
    }
    Ok(())
}

/// `x` restricted to the positions where `mask` is zero.
pub fn apply_mask(x: &BinarySequence, mask: &BinarySequence) -> Result<BinarySequence> {
    check_lengths(x, mask)?;
    let bits = x
        .bits()
        .iter()
        .zip(mask.bits())
        .filter(|(_, &m)| m == 0)
        .map(|(&b, _)| b)
        .collect();
    Ok(BinarySequence::from_bits_unchecked(bits))
}

/// Sends `x` through a deletion channel with deletion probability `d`.
pub fn transmit(x: &BinarySequence, d: f64, seed: u64) -> Result<DeletionRealization> {
    let mut rng = stream(seed, Purpose::Channel, 0);
    transmit_with_rng(x, d, &mut rng)
}

pub(crate) fn transmit_with_rng<R: Rng + ?Sized>(x: &BinarySequence, d: f64, rng: &mut R) -> Result<DeletionRealization> {
    check_probability("d", d)?;
    let mask: Vec<u8> = (0..x.len()).map(|_| u8::from(rng.gen_bool(d))).collect();
    DeletionRealization::from_mask(x.clone(), BinarySequence::from_bits_unchecked(mask))
}

/// Maximal-block decomposition.
pub fn segment_runs(x: &BinarySequence) -> Vec<Run> {
    runs_of(x.bits())
}

pub(crate) fn runs_of(bits: &[u8]) -> Vec<Run> {
    let mut runs: Vec<Run> = Vec::new();
    for &b in bits {
        match runs.last_mut() {
            Some(r) if r.value == b => r.len += 1,
            _ => runs.push(Run { value: b, len: 1 }),
        }
    }
    runs
}

/// Run lengths only.
pub fn run_lengths(x: &BinarySequence) -> Vec<usize> {
    runs_of(x.bits()).into_iter().map(|r| r.len).collect()
}

/// Super-runs with their `[start, end)` bit spans.
pub fn super_run_spans(x: &BinarySequence) -> Vec<(SuperRunType, std::ops::Range<usize>)> {
    let mut out: Vec<(SuperRunType, std::ops::Range<usize>)> = Vec::new();
    let mut pos = 0;
    for run in runs_of(x.bits()) {
        match out.last_mut() {
            Some((t, span)) if run.len == 1 => {
                t.l_alt += 1;
                span.end += 1;
            }
            _ => out.push((
                SuperRunType {
                    l_rep: run.len,
                    l_alt: 0,
                },
                pos..pos + run.len,
            )),
        }
        pos += run.len;
    }
    out
}

/// Groups runs into super-runs: a run of length one joins the super-run before it.
pub fn segment_super_runs(x: &BinarySequence) -> Vec<SuperRunType> {
    super_run_spans(x).into_iter().map(|(t, _)| t).collect()
}

/// Reverses every deletion inside an input run that suffers three or more.
/// Returns `(mask_hat, z)` with `z = mask XOR mask_hat`.
pub fn modified_mask(x: &BinarySequence, mask: &BinarySequence) -> Result<(BinarySequence, BinarySequence)> {
    check_lengths(x, mask)?;
    let m = mask.bits();
    let mut hat = m.to_vec();
    let mut pos = 0;
    for run in runs_of(x.bits()) {
        let span = pos..pos + run.len;
        if m[span.clone()].iter().filter(|&&b| b == 1).count() >= 3 {
            hat[span].fill(0);
        }
        pos += run.len;
    }
    Ok(split_reversal(m, hat))
}

/// Reverses the deletions in super-run `S_i` whenever `S_i, S_{i+1}, S_{i+2}`
/// carry three or more deletions together. Every window reads the original
/// mask, and windows running off the end count only the super-runs present.
pub fn perturbed_mask(x: &BinarySequence, mask: &BinarySequence) -> Result<(BinarySequence, BinarySequence)> {
    check_lengths(x, mask)?;
    let m = mask.bits();
    let spans = super_run_spans(x);
    let counts: Vec<usize> = spans
        .iter()
        .map(|(_, s)| m[s.clone()].iter().filter(|&&b| b == 1).count())
        .collect();
    let mut hat = m.to_vec();
    for (i, (_, span)) in spans.iter().enumerate() {
        let window: usize = counts[i..(i + 3).min(counts.len())].iter().sum();
        if window >= 3 {
            hat[span.clone()].fill(0);
        }
    }
    Ok(split_reversal(m, hat))
}

fn split_reversal(mask: &[u8], hat: Vec<u8>) -> (BinarySequence, BinarySequence) {
    let z = mask.iter().zip(&hat).map(|(a, b)| a ^ b).collect();
    (
        BinarySequence::from_bits_unchecked(hat),
        BinarySequence::from_bits_unchecked(z),
    )
}

/// Groups input runs into the parent blocks of the output runs.
///
/// `X(1)` and `Y(1)` start empty and `Y(1)` takes the value of the first
/// input run. Each input run `ω` (after deletions) is merged into the current
/// block when it repeats the block's bit or vanishes completely; otherwise a
/// new block starts.
pub fn parent_segmentation(x: &BinarySequence, mask: &BinarySequence) -> Result<ParentSegmentation> {
    check_lengths(x, mask)?;
    let m = mask.bits();
    let mut x_blocks: Vec<String> = vec![String::new()];
    let mut y_blocks: Vec<String> = vec![String::new()];
    let mut block_bit: Option<u8> = None;
    let mut pos = 0;
    for run in runs_of(x.bits()) {
        let span = pos..pos + run.len;
        pos += run.len;
        let survivors = m[span.clone()].iter().filter(|&&b| b == 0).count();
        let ch = if run.value == 1 { '1' } else { '0' };
        let bit = *block_bit.get_or_insert(run.value);
        if run.value != bit && survivors > 0 {
            x_blocks.push(String::new());
            y_blocks.push(String::new());
            block_bit = Some(run.value);
        }
        let j = x_blocks.len() - 1;
        x_blocks[j].extend(std::iter::repeat_n(ch, run.len));
        if run.value == block_bit.unwrap() {
            y_blocks[j].extend(std::iter::repeat_n(ch, survivors));
        }
    }
    let k = x_blocks[..x_blocks.len() - 1].iter().map(String::len).collect();
    Ok(ParentSegmentation { x_blocks, y_blocks, k })
}
