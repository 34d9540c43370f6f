//! Pointed spaces, alternating tensor words and the enumerated bases of the
//! two truncated product spaces.
//!
//! Every pointed space is `C^dim` with distinguished vector `e_0`; its reduced
//! subspace is spanned by `e_1, …, e_{dim-1}`. A basis vector of a product
//! space is a tensor of reduced basis vectors, identified by a [`BasisWord`].
//!
//! * H-side words are `k_1 ⊗ ⋯ ⊗ k_n ⊗ h` with K-letters `k_i` and a terminal
//!   H-letter `h` whose index differs from the last K-letter's, plus the
//!   distinguished word `ξ`.
//! * K-side words are alternating K-letter words with no terminal, plus the
//!   vacuum `η`.
//!
//! The truncation depth bounds the number of K-letters only.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numkernel::CVector;

/// One of the two component indices. `Alpha < Beta` is the monotone ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Index {
    Alpha,
    Beta,
}

impl Index {
    pub const BOTH: [Index; 2] = [Index::Alpha, Index::Beta];

    pub fn other(self) -> Index {
        match self {
            Index::Alpha => Index::Beta,
            Index::Beta => Index::Alpha,
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Index::Alpha => "alpha",
            Index::Beta => "beta",
        })
    }
}

/// `C^dim` with distinguished unit vector `e_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PointedSpace {
    dim: usize,
}

impl PointedSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Precondition("pointed spaces need dim >= 1".into()));
        }
        Ok(PointedSpace { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the orthogonal complement of the distinguished vector.
    pub fn reduced_dim(&self) -> usize {
        self.dim - 1
    }

    pub fn distinguished(&self) -> CVector {
        CVector::basis(self.dim, 0)
    }
}

/// The four spaces `(H_α, K_α, H_β, K_β)` of a c-free product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FourSpaces {
    pub h_alpha: PointedSpace,
    pub k_alpha: PointedSpace,
    pub h_beta: PointedSpace,
    pub k_beta: PointedSpace,
}

impl FourSpaces {
    /// Dimensions in the order `(H_α, K_α, H_β, K_β)`.
    pub fn from_dims(dims: [usize; 4]) -> Result<Self> {
        Ok(FourSpaces {
            h_alpha: PointedSpace::new(dims[0])?,
            k_alpha: PointedSpace::new(dims[1])?,
            h_beta: PointedSpace::new(dims[2])?,
            k_beta: PointedSpace::new(dims[3])?,
        })
    }

    pub fn dims(&self) -> [usize; 4] {
        [
            self.h_alpha.dim,
            self.k_alpha.dim,
            self.h_beta.dim,
            self.k_beta.dim,
        ]
    }

    pub fn h(&self, index: Index) -> PointedSpace {
        match index {
            Index::Alpha => self.h_alpha,
            Index::Beta => self.h_beta,
        }
    }

    pub fn k(&self, index: Index) -> PointedSpace {
        match index {
            Index::Alpha => self.k_alpha,
            Index::Beta => self.k_beta,
        }
    }
}

/// A reduced basis vector `e_coord` of the space carrying `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub index: Index,
    pub coord: usize,
}

impl Letter {
    pub fn new(index: Index, coord: usize) -> Self {
        Letter { index, coord }
    }
}

/// A tensor word `letters[0] ⊗ ⋯ ⊗ letters[n-1] (⊗ terminal)`.
///
/// Letters are K-space reduced vectors; the optional terminal is an H-space
/// reduced vector. The empty word is `ξ` on the H-side and `η` on the K-side.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisWord {
    pub letters: Vec<Letter>,
    pub terminal: Option<Letter>,
}

impl BasisWord {
    pub fn vacuum() -> Self {
        BasisWord {
            letters: Vec::new(),
            terminal: None,
        }
    }

    /// The bare terminal word `h_κ^o` (no K-letters).
    pub fn bare(index: Index, coord: usize) -> Self {
        BasisWord {
            letters: Vec::new(),
            terminal: Some(Letter::new(index, coord)),
        }
    }

    pub fn new(letters: Vec<Letter>, terminal: Option<Letter>) -> Self {
        BasisWord { letters, terminal }
    }

    pub fn is_vacuum(&self) -> bool {
        self.letters.is_empty() && self.terminal.is_none()
    }

    pub fn letter_count(&self) -> usize {
        self.letters.len()
    }

    pub fn first_letter(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn prepend(&self, letter: Letter) -> BasisWord {
        let mut letters = Vec::with_capacity(self.letters.len() + 1);
        letters.push(letter);
        letters.extend_from_slice(&self.letters);
        BasisWord {
            letters,
            terminal: self.terminal,
        }
    }

    /// Splits off the first K-letter, if any.
    pub fn strip(&self) -> Option<(Letter, BasisWord)> {
        let (&first, rest) = self.letters.split_first()?;
        Some((
            first,
            BasisWord {
                letters: rest.to_vec(),
                terminal: self.terminal,
            },
        ))
    }

    /// Alternation of letter indices, and terminal index different from the
    /// last letter's.
    pub fn is_alternating(&self) -> bool {
        let letters_ok = self.letters.windows(2).all(|w| w[0].index != w[1].index);
        let terminal_ok = match (self.letters.last(), self.terminal) {
            (Some(last), Some(t)) => last.index != t.index,
            _ => true,
        };
        letters_ok && terminal_ok
    }

    fn sort_key(&self) -> (usize, bool, &[Letter], Option<Letter>) {
        (
            self.letters.len(),
            self.terminal.is_some(),
            &self.letters,
            self.terminal,
        )
    }
}

impl fmt::Display for BasisWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_vacuum() {
            return f.write_str("vacuum");
        }
        let mut parts: Vec<String> = self
            .letters
            .iter()
            .map(|l| format!("k_{}[{}]", l.index, l.coord))
            .collect();
        if let Some(t) = self.terminal {
            parts.push(format!("h_{}[{}]", t.index, t.coord));
        }
        f.write_str(&parts.join("⊗"))
    }
}

/// Structural and coordinate admissibility of a word relative to `spaces`.
pub fn word_admissible(w: &BasisWord, spaces: &FourSpaces) -> bool {
    w.is_alternating()
        && w
            .letters
            .iter()
            .all(|l| (1..spaces.k(l.index).dim()).contains(&l.coord))
        && w
            .terminal
            .is_none_or(|t| (1..spaces.h(t.index).dim()).contains(&t.coord))
}

/// Which product space a basis enumerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisSide {
    /// The c-free product space `H`, distinguished vector `ξ`.
    H,
    /// Voiculescu's free product of the K-spaces, vacuum `η`.
    K,
}

/// Role of a word with respect to the block decomposition used to embed an
/// operator pair carrying index `ι`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EmbeddingBlock {
    /// `ξ` or a bare terminal in `H_ι^o`: the block on which `T_ι` acts.
    XiOrHome,
    /// First letter has index `ι`: the upper half of an `S_ι` block.
    Strip,
    /// Everything else: the lower half of an `S_ι` block.
    Prepend,
}

/// Classifies an H-side word for the embedding of an index-`ι` pair.
pub fn classify_for_embedding(w: &BasisWord, iota: Index) -> Result<EmbeddingBlock> {
    if !w.is_alternating() || (w.terminal.is_none() && !w.letters.is_empty()) {
        return Err(Error::InadmissibleWord(w.to_string()));
    }
    Ok(match (w.first_letter(), w.terminal) {
        (None, None) => EmbeddingBlock::XiOrHome,
        (None, Some(t)) if t.index == iota => EmbeddingBlock::XiOrHome,
        (Some(l), _) if l.index == iota => EmbeddingBlock::Strip,
        _ => EmbeddingBlock::Prepend,
    })
}

/// An enumerated, canonically ordered basis of a truncated product space.
#[derive(Debug, Clone)]
pub struct ProductBasis {
    side: BasisSide,
    depth: usize,
    spaces: FourSpaces,
    words: Vec<BasisWord>,
    index: HashMap<BasisWord, usize>,
}

/// Enumerates all admissible words of at most `depth` K-letters.
///
/// Ordering: letter count, then terminal-free before terminal-bearing, then
/// lexicographic on `(index, coord)`. Position 0 is always `ξ`/`η`.
pub fn build_product_basis(spaces: FourSpaces, depth: usize, side: BasisSide) -> ProductBasis {
    let mut words = vec![BasisWord::vacuum()];
    match side {
        BasisSide::H => {
            for kappa in Index::BOTH {
                for c in 1..spaces.h(kappa).dim() {
                    let terminal = Letter::new(kappa, c);
                    for n in 0..=depth {
                        // The letter adjacent to the terminal has the other index.
                        let pattern: Vec<Index> = (0..n)
                            .map(|pos| if (n - pos) % 2 == 1 { kappa.other() } else { kappa })
                            .collect();
                        extend_words(&spaces, &pattern, Some(terminal), &mut words);
                    }
                }
            }
        }
        BasisSide::K => {
            for n in 1..=depth {
                for start in Index::BOTH {
                    let pattern: Vec<Index> = (0..n)
                        .map(|pos| if pos % 2 == 0 { start } else { start.other() })
                        .collect();
                    extend_words(&spaces, &pattern, None, &mut words);
                }
            }
        }
    }
    words[1..].sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let index = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect();
    ProductBasis {
        side,
        depth,
        spaces,
        words,
        index,
    }
}

fn extend_words(
    spaces: &FourSpaces,
    pattern: &[Index],
    terminal: Option<Letter>,
    out: &mut Vec<BasisWord>,
) {
    if pattern.iter().any(|&i| spaces.k(i).reduced_dim() == 0) {
        return;
    }
    let mut coords = vec![1usize; pattern.len()];
    loop {
        let letters = pattern
            .iter()
            .zip(&coords)
            .map(|(&index, &coord)| Letter::new(index, coord))
            .collect();
        out.push(BasisWord::new(letters, terminal));
        // Odometer increment, last position fastest.
        let mut pos = pattern.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            coords[pos] += 1;
            if coords[pos] < spaces.k(pattern[pos]).dim() {
                break;
            }
            coords[pos] = 1;
        }
    }
}

impl ProductBasis {
    pub fn side(&self) -> BasisSide {
        self.side
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn spaces(&self) -> &FourSpaces {
        &self.spaces
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[BasisWord] {
        &self.words
    }

    pub fn word(&self, position: usize) -> &BasisWord {
        &self.words[position]
    }

    pub fn position(&self, w: &BasisWord) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// The coordinate vector of `ξ` (H-side) or `η` (K-side).
    pub fn distinguished_vector(&self) -> CVector {
        CVector::basis(self.len(), 0)
    }

    pub fn unit_vector(&self, w: &BasisWord) -> Option<CVector> {
        self.position(w).map(|p| CVector::basis(self.len(), p))
    }

    /// Number of basis words predicted by summing over admissible index
    /// patterns, without enumerating coordinates.
    pub fn closed_form_count(spaces: &FourSpaces, depth: usize, side: BasisSide) -> usize {
        let reduced = |i: Index| spaces.k(i).reduced_dim();
        let chain = |n: usize, last: Index| -> usize {
            // Product of reduced dims along an alternating chain of n letters
            // whose last letter is `last`.
            (0..n)
                .map(|pos| if (n - 1 - pos).is_multiple_of(2) { last } else { last.other() })
                .map(reduced)
                .product()
        };
        let mut count = 1;
        match side {
            BasisSide::H => {
                for kappa in Index::BOTH {
                    let per_terminal: usize = (0..=depth).map(|n| chain(n, kappa.other())).sum();
                    count += spaces.h(kappa).reduced_dim() * per_terminal;
                }
            }
            BasisSide::K => {
                for n in 1..=depth {
                    count += Index::BOTH.iter().map(|&last| chain(n, last)).sum::<usize>();
                }
            }
        }
        count
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "side": self.side,
            "depth": self.depth,
            "dims": self.spaces.dims(),
            "words": self.words,
        })
    }

    /// SHA-256 of the canonical JSON dump, hex encoded.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
