//! Truncated auxiliary space spanned by the graph vertices `k±`, `(k+1/2)±`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SparseOperator, ONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Graph vertex. The level is stored doubled so that `(k+1/2)` is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AuxVertex {
    pub twice_level: usize,
    pub sign: Sign,
}

impl AuxVertex {
    /// Integer level `k` with the given sign.
    pub fn int(k: usize, sign: Sign) -> Self {
        AuxVertex {
            twice_level: 2 * k,
            sign,
        }
    }

    /// Half-integer level `k + 1/2`.
    pub fn half(k: usize, sign: Sign) -> Self {
        AuxVertex {
            twice_level: 2 * k + 1,
            sign,
        }
    }

    pub fn level(&self) -> f64 {
        self.twice_level as f64 / 2.0
    }

    pub fn is_half_integer(&self) -> bool {
        self.twice_level % 2 == 1
    }

    /// Image under the graph reflection: integer levels fixed, half-integer
    /// levels change sign.
    pub fn reflected(&self) -> Self {
        if self.is_half_integer() {
            AuxVertex {
                twice_level: self.twice_level,
                sign: self.sign.flipped(),
            }
        } else {
            *self
        }
    }

    /// Parses labels such as `0+`, `3/2-`, `2+`.
    pub fn parse(label: &str) -> Option<Self> {
        let label = label.trim();
        let (body, sign) = match label.chars().last()? {
            '+' => (&label[..label.len() - 1], Sign::Plus),
            '-' => (&label[..label.len() - 1], Sign::Minus),
            _ => return None,
        };
        let twice_level = match body.split_once('/') {
            Some((num, "2")) => {
                let n: usize = num.parse().ok()?;
                if n.is_multiple_of(2) {
                    return None;
                }
                n
            }
            Some(_) => return None,
            None => 2 * body.parse::<usize>().ok()?,
        };
        Some(AuxVertex { twice_level, sign })
    }
}

impl fmt::Display for AuxVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_half_integer() {
            write!(f, "{}/2{}", self.twice_level, self.sign.symbol())
        } else {
            write!(f, "{}{}", self.twice_level / 2, self.sign.symbol())
        }
    }
}

/// Ordered vertex basis `0+, 1/2+, 1/2-, 1-, 1+, 3/2+, ...` up to level `K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxSpace {
    cutoff: usize,
    vertices: Vec<AuxVertex>,
}

impl AuxSpace {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidCutoff(
                "cutoff K must be at least 1, K = 0 leaves no transitions".into(),
            ));
        }
        let mut vertices = Vec::with_capacity(4 * cutoff + 1);
        vertices.push(AuxVertex::int(0, Sign::Plus));
        for k in 0..cutoff {
            vertices.push(AuxVertex::half(k, Sign::Plus));
            vertices.push(AuxVertex::half(k, Sign::Minus));
            vertices.push(AuxVertex::int(k + 1, Sign::Minus));
            vertices.push(AuxVertex::int(k + 1, Sign::Plus));
        }
        Ok(AuxSpace { cutoff, vertices })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[AuxVertex] {
        &self.vertices
    }

    pub fn vertex(&self, index: usize) -> AuxVertex {
        self.vertices[index]
    }

    /// Position of a vertex, or `None` if it lies beyond the cutoff or does
    /// not exist (`0-`).
    pub fn index(&self, v: AuxVertex) -> Option<usize> {
        if v.twice_level > 2 * self.cutoff {
            return None;
        }
        if v.twice_level == 0 {
            return (v.sign == Sign::Plus).then_some(0);
        }
        let k = (v.twice_level - 1) / 2;
        let base = 1 + 4 * k;
        Some(match (v.is_half_integer(), v.sign) {
            (true, Sign::Plus) => base,
            (true, Sign::Minus) => base + 1,
            (false, Sign::Minus) => base + 2,
            (false, Sign::Plus) => base + 3,
        })
    }

    pub fn twice_level(&self, index: usize) -> usize {
        self.vertices[index].twice_level
    }

    pub fn label(&self, index: usize) -> String {
        self.vertices[index].to_string()
    }

    /// Indices of vertices with level at most `max_level`, in basis order.
    pub fn indices_up_to(&self, max_level: usize) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.vertices[i].twice_level <= 2 * max_level)
            .collect()
    }

    /// The graph reflection as a permutation operator.
    pub fn spin_flip(&self) -> SparseOperator {
        let n = self.dim();
        let triplets = (0..n).map(|i| {
            let j = self
                .index(self.vertices[i].reflected())
                .expect("reflection preserves the level");
            (j, i, ONE)
        });
        SparseOperator::from_triplets(n, n, triplets).expect("indices in range")
    }

    /// Lists the stored entries of an auxiliary operator with vertex labels.
    pub fn labelled_entries(&self, op: &SparseOperator) -> Vec<LabelledEntry> {
        op.iter()
            .map(|(i, j, v)| LabelledEntry {
                row: self.label(i),
                col: self.label(j),
                re: v.re,
                im: v.im,
            })
            .collect()
    }
}

/// One operator entry addressed by vertex labels, used for JSON dumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelledEntry {
    pub row: String,
    pub col: String,
    pub re: f64,
    pub im: f64,
}
