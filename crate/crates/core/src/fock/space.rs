use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::seed::{Label, SeedDescriptor, SeedSpace};
use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};

/// A sector index: a sequence of seed labels. The empty word is the vacuum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<Label>);

impl Word {
    pub fn vacuum() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Label] {
        &self.0
    }

    pub fn first(&self) -> Option<Label> {
        self.0.first().copied()
    }

    pub fn is_alternating(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1])
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn prepend(&self, label: Label) -> Word {
        let mut v = Vec::with_capacity(self.len() + 1);
        v.push(label);
        v.extend_from_slice(&self.0);
        Word(v)
    }

    pub fn tail(&self) -> Word {
        Word(self.0.get(1..).unwrap_or(&[]).to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("vac");
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        f.write_str(&parts.join("-"))
    }
}

/// One summand of the word decomposition: a tensor product of reduced
/// seed spaces, stored row-major (first letter most significant).
#[derive(Debug, Clone)]
pub struct Sector {
    pub word: Word,
    pub dim: usize,
    pub offset: usize,
    /// Reduced dimension of each tensor factor.
    pub shape: Vec<usize>,
}

impl Sector {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.dim
    }
}

/// Truncated free product of seed spaces: the vacuum line plus all
/// alternating-word sectors of length at most `max_len`.
///
/// Sectors are ordered by length, then lexicographically by label; this
/// ordering fixes the coordinate offsets.
#[derive(Debug, Clone)]
pub struct FockSpace {
    seeds: Vec<SeedSpace>,
    max_len: usize,
    sectors: Vec<Sector>,
    index: HashMap<Word, usize>,
    total_dim: usize,
}

impl FockSpace {
    pub fn new(mut seeds: Vec<SeedSpace>, max_len: usize) -> Result<Self> {
        if seeds.is_empty() {
            return Err(Error::NoSeeds);
        }
        if max_len < 1 {
            return Err(Error::InvalidParameter { name: "max_len", reason: "must be at least 1".into() });
        }
        seeds.sort_by_key(|s| s.label());
        for w in seeds.windows(2) {
            if w[0].label() == w[1].label() {
                return Err(Error::DuplicateLabel(w[0].label()));
            }
        }
        let labels: Vec<Label> = seeds.iter().map(|s| s.label()).collect();
        let reduced: HashMap<Label, usize> = seeds.iter().map(|s| (s.label(), s.reduced_dim())).collect();

        let mut words = vec![Word::vacuum()];
        let mut frontier = vec![Word::vacuum()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for &l in &labels {
                    if w.0.last() != Some(&l) {
                        let mut v = w.0.clone();
                        v.push(l);
                        next.push(Word(v));
                    }
                }
            }
            words.extend(next.iter().cloned());
            frontier = next;
        }

        let mut sectors = Vec::with_capacity(words.len());
        let mut index = HashMap::with_capacity(words.len());
        let mut offset = 0;
        for (i, word) in words.into_iter().enumerate() {
            let shape: Vec<usize> = word.0.iter().map(|l| reduced[l]).collect();
            let dim = shape.iter().product::<usize>();
            index.insert(word.clone(), i);
            sectors.push(Sector { word, dim, offset, shape });
            offset += dim;
        }
        Ok(Self { seeds, max_len, sectors, index, total_dim: offset })
    }

    pub fn seeds(&self) -> &[SeedSpace] {
        &self.seeds
    }

    pub fn seed(&self, label: Label) -> Result<&SeedSpace> {
        self.seeds
            .binary_search_by_key(&label, |s| s.label())
            .map(|i| &self.seeds[i])
            .map_err(|_| Error::UnknownLabel(label))
    }

    pub fn labels(&self) -> Vec<Label> {
        self.seeds.iter().map(|s| s.label()).collect()
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn sector_index(&self, word: &Word) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn sector(&self, word: &Word) -> Option<&Sector> {
        self.sector_index(word).map(|i| &self.sectors[i])
    }

    /// The vacuum vector.
    pub fn vacuum(&self) -> CVector {
        let mut v = CVector::zeros(self.total_dim);
        v[0] = C64::new(1.0, 0.0);
        v
    }

    pub fn check_vector(&self, v: &CVector) -> Result<()> {
        if v.len() != self.total_dim {
            return Err(Error::DimensionMismatch { expected: self.total_dim, got: v.len() });
        }
        Ok(())
    }

    /// Elementary tensor `xi_1 (x) ... (x) xi_n` of vectors given in seed
    /// coordinates; each `xi_j` is projected onto the reduced space.
    pub fn elementary_tensor(&self, factors: &[(Label, CVector)]) -> Result<CVector> {
        let word = Word(factors.iter().map(|(l, _)| *l).collect());
        let sector = self
            .sector(&word)
            .ok_or_else(|| Error::InvalidParameter { name: "word", reason: format!("{word} is not a sector") })?;
        let mut block = CVector::from_element(1, C64::new(1.0, 0.0));
        for (l, xi) in factors {
            let seed = self.seed(*l)?;
            if xi.len() != seed.dim() {
                return Err(Error::DimensionMismatch { expected: seed.dim(), got: xi.len() });
            }
            let coords = seed.coordinates(xi);
            let reduced = coords.rows(1, seed.reduced_dim()).into_owned();
            block = block.kronecker(&reduced);
        }
        let mut v = CVector::zeros(self.total_dim);
        v.rows_mut(sector.offset, sector.dim).copy_from(&block);
        Ok(v)
    }

    /// Number of alternating words of length `n` over the seed labels.
    pub fn sectors_of_length(&self, n: usize) -> usize {
        self.sectors.iter().filter(|s| s.word.len() == n).count()
    }

    pub fn descriptor(&self) -> FockDescriptor {
        FockDescriptor {
            version: 1,
            max_len: self.max_len,
            seeds: self.seeds.iter().map(|s| s.descriptor()).collect(),
            sectors: self
                .sectors
                .iter()
                .map(|s| SectorDescriptor { word: s.word.clone(), dim: s.dim, offset: s.offset })
                .collect(),
            total_dim: self.total_dim,
        }
    }

    pub fn from_descriptor(desc: &FockDescriptor) -> Result<Self> {
        let seeds = desc.seeds.iter().map(SeedDescriptor::build).collect::<Result<Vec<_>>>()?;
        let fock = Self::new(seeds, desc.max_len)?;
        let rebuilt = fock.descriptor();
        if rebuilt.sectors != desc.sectors || rebuilt.total_dim != desc.total_dim {
            return Err(Error::InvalidParameter {
                name: "sectors",
                reason: "sector table does not match the canonical enumeration".into(),
            });
        }
        Ok(fock)
    }
}

/// Serializable description of a [`FockSpace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockDescriptor {
    pub version: u32,
    pub max_len: usize,
    pub seeds: Vec<SeedDescriptor>,
    pub sectors: Vec<SectorDescriptor>,
    pub total_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorDescriptor {
    pub word: Word,
    pub dim: usize,
    pub offset: usize,
}

/// Convenience constructor: seeds `C^{d}` with standard vacuum, labels 1..
pub fn build_standard(dims: &[usize], max_len: usize) -> Result<FockSpace> {
    let seeds = dims.iter().enumerate().map(|(i, &d)| SeedSpace::standard(i + 1, d)).collect::<Result<Vec<_>>>()?;
    FockSpace::new(seeds, max_len)
}
