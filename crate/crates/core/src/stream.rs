//! Streams, workload generators, and the stream file formats.
//!
//! Text files carry `#n=<n>` and `#m=<m>` header lines followed by one
//! decimal token per line. Binary files start with the magic `FKSTRM01`,
//! then `n` and `m` as little-endian `u64`, then `m` little-endian `u64`
//! tokens.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Zipf};
use thiserror::Error;

use crate::error::{invalid, Result, SketchError};
use crate::hashkit::{derive_seed, rng_from_seed, SeedTag};
use crate::num::ceil_formula;
use crate::Element;

pub const BINARY_MAGIC: &[u8; 8] = b"FKSTRM01";

/// A token sequence over the universe `[1, n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stream {
    pub n: u64,
    pub tokens: Vec<Element>,
}

impl Stream {
    pub fn new(n: u64, tokens: Vec<Element>) -> Result<Self> {
        if n == 0 {
            return invalid("universe size must be positive");
        }
        if let Some(bad) = tokens.iter().find(|&&x| x == 0 || x > n) {
            return invalid(format!("token {bad} outside [1, {n}]"));
        }
        Ok(Self { n, tokens })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// A planted promise stream and its ground truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedStream {
    pub stream: Stream,
    pub planted: Element,
    pub frequency: u64,
    /// Interval length; each interval `[i L, (i+1) L)` holds one planted copy.
    pub interval: u64,
}

/// Planted frequency `ceil(c n^(1/k))`.
pub fn planted_frequency(n: u64, k: u32, c: f64) -> u64 {
    ceil_formula(c * (n as f64).powf(1.0 / k as f64))
}

/// A stream of length `n` in which one element occurs `ceil(c n^(1/k))`
/// times, once per interval, and every other token is distinct.
pub fn gen_planted(n: u64, k: u32, c: f64, seed: u64) -> Result<PlantedStream> {
    if n < 16 {
        return invalid("planted streams need n >= 16");
    }
    gen_planted_with(n, k, c, n, seed)
}

/// Planted stream of arbitrary length `m`. Non-planted tokens are distinct
/// when `m - f < n`, and uniform over the other elements otherwise.
pub fn gen_planted_with(n: u64, k: u32, c: f64, m: u64, seed: u64) -> Result<PlantedStream> {
    if !(c >= 1.0) || k == 0 {
        return invalid("planted streams need c >= 1 and k >= 1");
    }
    if n < 2 {
        return invalid("planted streams need n >= 2");
    }
    let f = planted_frequency(n, k, c);
    if f == 0 || f > m {
        return invalid(format!("planted frequency {f} does not fit in length {m}"));
    }
    let mut rng = rng_from_seed(derive_seed(seed, SeedTag::Generator, 0));
    let planted = rng.random_range(1..=n);
    let rest = (m - f) as usize;
    let map = |i: u64| if i + 1 >= planted { i + 2 } else { i + 1 };
    let mut others: Vec<Element> = if (rest as u64) < n {
        rand::seq::index::sample(&mut rng, (n - 1) as usize, rest)
            .into_iter()
            .map(|i| map(i as u64))
            .collect()
    } else {
        (0..rest).map(|_| map(rng.random_range(0..n - 1))).collect()
    };
    others.shuffle(&mut rng);
    let interval = m / f;
    let mut tokens = Vec::with_capacity(m as usize);
    let mut it = others.into_iter();
    for _ in 0..f {
        let at = rng.random_range(0..interval);
        for j in 0..interval {
            if j == at {
                tokens.push(planted);
            } else {
                tokens.push(it.next().expect("enough filler tokens"));
            }
        }
    }
    tokens.extend(it);
    Ok(PlantedStream {
        stream: Stream::new(n, tokens)?,
        planted,
        frequency: f,
        interval,
    })
}

/// `m` i.i.d. draws with `P(i) ~ i^-s` over `[1, n]`, in shuffled order.
pub fn gen_zipf(n: u64, m: u64, s: f64, seed: u64) -> Result<Stream> {
    if !(s >= 0.0) {
        return invalid("zipf exponent must be non-negative");
    }
    if n == 0 {
        return invalid("universe size must be positive");
    }
    let dist = Zipf::new(n as f64, s).map_err(|e| SketchError::InvalidParameter(e.to_string()))?;
    let mut rng = rng_from_seed(derive_seed(seed, SeedTag::Generator, 1));
    let mut tokens: Vec<Element> = (0..m)
        .map(|_| (dist.sample(&mut rng) as u64).clamp(1, n))
        .collect();
    tokens.shuffle(&mut rng);
    Stream::new(n, tokens)
}

/// `m` uniform draws over `[1, n]`.
pub fn gen_uniform(n: u64, m: u64, seed: u64) -> Result<Stream> {
    if n == 0 {
        return invalid("universe size must be positive");
    }
    let mut rng = rng_from_seed(derive_seed(seed, SeedTag::Generator, 2));
    Stream::new(n, (0..m).map(|_| rng.random_range(1..=n)).collect())
}

/// Zipf probability mass of rank `i`.
pub fn zipf_mass(n: u64, s: f64, i: u64) -> f64 {
    let h: f64 = (1..=n).map(|j| (j as f64).powf(-s)).sum();
    (i as f64).powf(-s) / h
}

/// Errors reading or writing stream files.
#[derive(Debug, Error)]
pub enum StreamFileError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("malformed stream file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Invalid(#[from] SketchError),
}

fn malformed<T>(msg: impl Into<String>) -> std::result::Result<T, StreamFileError> {
    Err(StreamFileError::Malformed(msg.into()))
}

pub fn write_text(path: &Path, s: &Stream) -> std::result::Result<(), StreamFileError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "#n={}", s.n)?;
    writeln!(w, "#m={}", s.tokens.len())?;
    for x in &s.tokens {
        writeln!(w, "{x}")?;
    }
    w.flush()?;
    Ok(())
}

fn header(line: Option<io::Result<String>>, key: &str) -> std::result::Result<u64, StreamFileError> {
    let line = match line {
        Some(l) => l?,
        None => return malformed(format!("missing #{key}= header")),
    };
    let prefix = format!("#{key}=");
    match line.trim().strip_prefix(&prefix).map(str::parse::<u64>) {
        Some(Ok(v)) => Ok(v),
        _ => malformed(format!("expected #{key}=<integer>, found {line:?}")),
    }
}

pub fn read_text(path: &Path) -> std::result::Result<Stream, StreamFileError> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let n = header(lines.next(), "n")?;
    let m = header(lines.next(), "m")?;
    let mut tokens = Vec::with_capacity(m.min(1 << 24) as usize);
    for (i, line) in lines.enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        match t.parse::<u64>() {
            Ok(x) => tokens.push(x),
            Err(_) => return malformed(format!("line {}: {t:?} is not a token", i + 3)),
        }
    }
    if tokens.len() as u64 != m {
        return malformed(format!("header says m={m}, found {} tokens", tokens.len()));
    }
    Ok(Stream::new(n, tokens)?)
}

pub fn write_binary(path: &Path, s: &Stream) -> std::result::Result<(), StreamFileError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&s.n.to_le_bytes())?;
    w.write_all(&(s.tokens.len() as u64).to_le_bytes())?;
    for x in &s.tokens {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u64(r: &mut impl Read) -> std::result::Result<u64, StreamFileError> {
    let mut b = [0u8; 8];
    match r.read_exact(&mut b) {
        Ok(()) => Ok(u64::from_le_bytes(b)),
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => malformed("truncated binary stream"),
        Err(e) => Err(e.into()),
    }
}

pub fn read_binary(path: &Path) -> std::result::Result<Stream, StreamFileError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    if r.read_exact(&mut magic).is_err() || &magic != BINARY_MAGIC {
        return malformed("bad binary magic");
    }
    let n = read_u64(&mut r)?;
    let m = read_u64(&mut r)?;
    let mut tokens = Vec::with_capacity(m.min(1 << 24) as usize);
    for _ in 0..m {
        tokens.push(read_u64(&mut r)?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return malformed("trailing bytes after binary stream");
    }
    Ok(Stream::new(n, tokens)?)
}

/// Reads either format, chosen by the leading magic.
pub fn read_stream(path: &Path) -> std::result::Result<Stream, StreamFileError> {
    let mut head = [0u8; 8];
    let got = File::open(path)?.read(&mut head)?;
    if got == 8 && &head == BINARY_MAGIC {
        read_binary(path)
    } else {
        read_text(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::histogram;

    #[test]
    fn planted_n16() {
        let p = gen_planted(16, 2, 1.0, 3).unwrap();
        assert_eq!(p.frequency, 4);
        let h = histogram(&p.stream.tokens);
        assert_eq!(h[&p.planted], 4);
        assert!(h.iter().all(|(&x, &f)| x == p.planted || f == 1));
        assert_eq!(p.stream.len(), 16);
    }

    #[test]
    fn planted_one_per_interval() {
        for seed in 0..20 {
            let p = gen_planted(1 << 10, 3, 2.0, seed).unwrap();
            let l = p.interval as usize;
            for i in 0..p.frequency as usize {
                let c = p.stream.tokens[i * l..(i + 1) * l]
                    .iter()
                    .filter(|&&x| x == p.planted)
                    .count();
                assert_eq!(c, 1);
            }
        }
    }

    #[test]
    fn zipf_empty() {
        assert!(gen_zipf(100, 0, 1.0, 1).unwrap().is_empty());
    }
}
