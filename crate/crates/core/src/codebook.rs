//! Paths, monomial codewords and the codes `C(m, T)` built from them.
//!
//! A path `(a_1, ..., a_m)` names the monomial `x_1^{a_1} ... x_m^{a_m}` and,
//! through the recursive Plotkin split, one leaf of the decoding tree. Code
//! positions are indexed by `j = (x_1 ... x_m)` read as a binary number with
//! `x_1` most significant, so the `x_1 = 0` half of every codeword is the
//! `u` half of `(u, u + v)`.
//!
//! Paths are stored as integers with `a_1` in the most significant of `len`
//! bits. For paths of equal length, integer order and lexicographic order of
//! the text form coincide.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Longest path representable by [`Path`].
pub const MAX_PATH_LEN: u32 = 30;

/// Largest code depth accepted by [`CodeSpec`]; blocks are stored densely.
pub const MAX_CODE_DEPTH: u32 = 24;

/// A bit sequence `(a_1, ..., a_m)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Path {
    bits: u32,
    len: u32,
}

impl Path {
    pub const fn empty() -> Self {
        Path { bits: 0, len: 0 }
    }

    /// Builds a path from `a_1, ..., a_m`.
    pub fn new(bits: &[u8]) -> Result<Self> {
        if bits.len() > MAX_PATH_LEN as usize {
            return Err(Error::Depth {
                got: bits.len() as u32,
                min: 0,
                max: MAX_PATH_LEN,
            });
        }
        let mut path = Path::empty();
        for &b in bits {
            if b > 1 {
                return Err(Error::PathParse(format!("{bits:?}")));
            }
            path = path.child(b);
        }
        Ok(path)
    }

    /// The path whose integer form (`a_1` most significant) is `index`.
    pub fn from_index(index: u32, len: u32) -> Self {
        assert!(len <= MAX_PATH_LEN, "path length {len} too large");
        assert!(
            u64::from(index) < 1u64 << len,
            "index {index} does not fit in {len} bits"
        );
        Path { bits: index, len }
    }

    pub fn index(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Hamming weight `w(ξ)`.
    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Bit `a_l` for `l` in `1..=len`.
    pub fn bit(&self, l: u32) -> u8 {
        assert!(l >= 1 && l <= self.len, "bit index {l} out of range");
        ((self.bits >> (self.len - l)) & 1) as u8
    }

    /// Iterates `a_1, ..., a_m`.
    pub fn bits(&self) -> impl Iterator<Item = u8> + '_ {
        (1..=self.len).map(move |l| self.bit(l))
    }

    /// The extension `(ξ, bit)`.
    pub fn child(&self, bit: u8) -> Self {
        debug_assert!(bit <= 1);
        assert!(self.len < MAX_PATH_LEN, "path too long");
        Path {
            bits: (self.bits << 1) | u32::from(bit),
            len: self.len + 1,
        }
    }

    /// All `2^m` paths of length `m` in increasing (lexicographic) order.
    pub fn all(m: u32) -> impl Iterator<Item = Path> {
        assert!(m <= MAX_PATH_LEN);
        (0..1u32 << m).map(move |i| Path::from_index(i, m))
    }
}

impl Ord for Path {
    fn cmp(&self, other: &Self) -> Ordering {
        let common = self.len.min(other.len);
        let a = self.bits >> (self.len - common);
        let b = other.bits >> (other.len - common);
        a.cmp(&b).then(self.len.cmp(&other.len))
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Path({self})")
    }
}

impl FromStr for Path {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() > MAX_PATH_LEN as usize {
            return Err(Error::PathParse(s.to_string()));
        }
        let mut path = Path::empty();
        for c in s.chars() {
            path = match c {
                '0' => path.child(0),
                '1' => path.child(1),
                _ => return Err(Error::PathParse(s.to_string())),
            };
        }
        Ok(path)
    }
}

/// Code length parameter `m` and information set `T`.
#[derive(Clone, PartialEq, Eq)]
pub struct CodeSpec {
    m: u32,
    info: Vec<Path>,
    mask: Vec<bool>,
}

impl CodeSpec {
    pub fn new(m: u32, paths: impl IntoIterator<Item = Path>) -> Result<Self> {
        check_depth(m)?;
        let mut mask = vec![false; 1 << m];
        let mut info = Vec::new();
        for p in paths {
            if p.len() != m {
                return Err(Error::PathLength {
                    expected: m,
                    got: p.len(),
                });
            }
            if std::mem::replace(&mut mask[p.index() as usize], true) {
                return Err(Error::DuplicatePath(p.to_string()));
            }
            info.push(p);
        }
        if info.is_empty() {
            return Err(Error::EmptyInfoSet);
        }
        info.sort_unstable();
        Ok(CodeSpec { m, info, mask })
    }

    /// Builds a spec from a membership mask indexed by path integer.
    pub fn from_mask(m: u32, mask: Vec<bool>) -> Result<Self> {
        check_depth(m)?;
        if mask.len() != 1 << m {
            return Err(Error::Length {
                expected: 1 << m,
                got: mask.len(),
            });
        }
        let info: Vec<Path> = mask
            .iter()
            .enumerate()
            .filter(|(_, &on)| on)
            .map(|(i, _)| Path::from_index(i as u32, m))
            .collect();
        if info.is_empty() {
            return Err(Error::EmptyInfoSet);
        }
        Ok(CodeSpec { m, info, mask })
    }

    /// The full code `RM(m, m)`.
    pub fn full(m: u32) -> Result<Self> {
        rm_info_set(m, m)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Block length `n = 2^m`.
    pub fn n(&self) -> usize {
        1 << self.m
    }

    pub fn k(&self) -> usize {
        self.info.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    /// Information paths in lexicographic order.
    pub fn info_paths(&self) -> &[Path] {
        &self.info
    }

    pub fn contains(&self, path: &Path) -> bool {
        path.len() == self.m && self.mask[path.index() as usize]
    }

    /// Membership by path integer.
    pub fn is_info(&self, index: usize) -> bool {
        self.mask[index]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// TOML form: `m` and `info_paths` as `a_1...a_m` strings.
    pub fn to_toml(&self) -> String {
        let file = SpecFile {
            m: self.m,
            info_paths: self.info.iter().map(Path::to_string).collect(),
        };
        toml::to_string(&file).expect("spec serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: SpecFile = toml::from_str(text).map_err(|e| Error::Parse {
            line: e
                .span()
                .map(|s| text[..s.start].lines().count().max(1))
                .unwrap_or(0),
            msg: e.message().to_string(),
        })?;
        let paths = file
            .info_paths
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<Path>>>()?;
        CodeSpec::new(file.m, paths)
    }
}

impl fmt::Debug for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CodeSpec")
            .field("m", &self.m)
            .field("k", &self.k())
            .field("info", &self.info)
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    m: u32,
    info_paths: Vec<String>,
}

fn check_depth(m: u32) -> Result<()> {
    if (1..=MAX_CODE_DEPTH).contains(&m) {
        Ok(())
    } else {
        Err(Error::Depth {
            got: m,
            min: 1,
            max: MAX_CODE_DEPTH,
        })
    }
}

/// Information bits `f_ξ` for the paths of `T`. Frozen paths carry 0 and are
/// never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Message {
    bits: BTreeMap<Path, bool>,
}

impl Message {
    pub fn zeros(spec: &CodeSpec) -> Self {
        Message {
            bits: spec.info_paths().iter().map(|&p| (p, false)).collect(),
        }
    }

    /// Assigns `bits` to the information paths in lexicographic order.
    pub fn from_bits(spec: &CodeSpec, bits: &[bool]) -> Result<Self> {
        if bits.len() != spec.k() {
            return Err(Error::Length {
                expected: spec.k(),
                got: bits.len(),
            });
        }
        Ok(Message {
            bits: spec.info_paths().iter().copied().zip(bits.iter().copied()).collect(),
        })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Path, bool)>) -> Self {
        Message {
            bits: pairs.into_iter().collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(spec: &CodeSpec, rng: &mut R) -> Self {
        Message {
            bits: spec
                .info_paths()
                .iter()
                .map(|&p| (p, rng.random::<bool>()))
                .collect(),
        }
    }

    pub fn get(&self, path: &Path) -> Option<bool> {
        self.bits.get(path).copied()
    }

    pub fn set(&mut self, path: Path, bit: bool) {
        self.bits.insert(path, bit);
    }

    pub fn iter(&self) -> impl Iterator<Item = (Path, bool)> + '_ {
        self.bits.iter().map(|(&p, &b)| (p, b))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bitwise sum of two messages over the union of their domains.
    pub fn xor(&self, other: &Message) -> Message {
        let mut out = self.clone();
        for (p, b) in other.iter() {
            let e = out.bits.entry(p).or_insert(false);
            *e ^= b;
        }
        out
    }

    /// Dense coefficient vector `f_ξ` indexed by path integer.
    pub fn coefficients(&self, spec: &CodeSpec) -> Result<Vec<u8>> {
        let mut f = vec![0u8; spec.n()];
        for (p, b) in self.iter() {
            if !spec.contains(&p) {
                return Err(Error::PathNotInInfoSet(p.to_string()));
            }
            f[p.index() as usize] = u8::from(b);
        }
        Ok(f)
    }

    /// One `path bit` pair per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (p, b) in self.iter() {
            s.push_str(&format!("{p} {}\n", u8::from(b)));
        }
        s
    }

    /// Parses [`Message::to_text`] output. Blank lines and `#` lines are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut bits = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: &str| Error::Parse {
                line: i + 1,
                msg: msg.to_string(),
            };
            let mut fields = line.split_whitespace();
            let (Some(p), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(parse_err("expected `path bit`"));
            };
            let path: Path = p.parse().map_err(|e: Error| parse_err(&e.to_string()))?;
            let bit = match b {
                "0" => false,
                "1" => true,
                _ => return Err(parse_err("bit must be 0 or 1")),
            };
            if bits.insert(path, bit).is_some() {
                return Err(parse_err("duplicate path"));
            }
        }
        Ok(Message { bits })
    }
}

/// A binary codeword of length `2^m`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Codeword(Vec<u8>);

impl Codeword {
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Domain {
                name: "codeword bit",
                value: f64::from(b),
                range: "{0, 1}",
            });
        }
        Ok(Codeword(bits))
    }

    pub fn zeros(n: usize) -> Self {
        Codeword(vec![0; n])
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    /// Channel-domain view: bit `a` maps to `(-1)^a`.
    pub fn symbols(&self) -> Vec<i8> {
        self.0.iter().map(|&b| 1 - 2 * b as i8).collect()
    }

    pub fn xor(&self, other: &Codeword) -> Codeword {
        assert_eq!(self.len(), other.len());
        Codeword(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Codeword({self})")
    }
}

impl FromStr for Codeword {
    type Err = Error;

    /// Reads the first non-comment line as a run of `0`/`1` characters.
    fn from_str(s: &str) -> Result<Self> {
        let (i, line) = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i, l.trim()))
            .find(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .ok_or(Error::Parse {
                line: 0,
                msg: "no codeword line".into(),
            })?;
        let bits = line
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse {
                    line: i + 1,
                    msg: format!("unexpected character {c:?}"),
                }),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Codeword(bits))
    }
}

/// Evaluates `x^ξ` at every position of `F_2^m`.
pub fn monomial_codeword(m: u32, xi: &Path) -> Result<Codeword> {
    check_depth(m)?;
    if xi.len() != m {
        return Err(Error::PathLength {
            expected: m,
            got: xi.len(),
        });
    }
    let mask = xi.index() as usize;
    Ok(Codeword(
        (0..1usize << m).map(|j| u8::from(j & mask == mask)).collect(),
    ))
}

/// Information set of `RM(r, m)`: every path of weight at most `r`.
pub fn rm_info_set(r: u32, m: u32) -> Result<CodeSpec> {
    check_depth(m)?;
    if r > m {
        return Err(Error::Domain {
            name: "r",
            value: f64::from(r),
            range: "0..=m",
        });
    }
    CodeSpec::new(m, Path::all(m).filter(|p| p.weight() <= r))
}

/// Sums the monomial codewords of every path carrying a 1.
pub fn encode_monomial_sum(spec: &CodeSpec, msg: &Message) -> Result<Codeword> {
    let f = msg.coefficients(spec)?;
    let mut c = vec![0u8; spec.n()];
    for (i, _) in f.iter().enumerate().filter(|(_, &b)| b == 1) {
        let mono = monomial_codeword(spec.m(), &Path::from_index(i as u32, spec.m()))?;
        for (cj, mj) in c.iter_mut().zip(mono.bits()) {
            *cj ^= mj;
        }
    }
    Ok(Codeword(c))
}

/// Encodes with the `(u, u + v)` recursion: paths with `a_1 = 0` build `u`,
/// paths with `a_1 = 1` build `v`.
pub fn encode_plotkin(spec: &CodeSpec, msg: &Message) -> Result<Codeword> {
    let f = msg.coefficients(spec)?;
    Ok(Codeword(plotkin_transform(&f)))
}

/// The Plotkin recursion on a dense coefficient vector of length `2^m`.
pub fn plotkin_transform(coeffs: &[u8]) -> Vec<u8> {
    assert!(coeffs.len().is_power_of_two());
    let mut out = coeffs.to_vec();
    plotkin_in_place(&mut out);
    out
}

fn plotkin_in_place(block: &mut [u8]) {
    if block.len() == 1 {
        return;
    }
    let half = block.len() / 2;
    let (u, v) = block.split_at_mut(half);
    plotkin_in_place(u);
    plotkin_in_place(v);
    for (vi, ui) in v.iter_mut().zip(u.iter()) {
        *vi ^= *ui;
    }
}
