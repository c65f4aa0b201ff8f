//! Line-oriented text documents for certificates, ROMs and metadata.
//!
//! ```text
//! romcert certificate
//! scalar kappa_hat 3.0000000000000000e0
//! text derivative_mode exact
//! matrix p 2 2
//!   1.0000000000000000e0 0.0000000000000000e0
//!   0.0000000000000000e0 1.0000000000000000e0
//! ```
//!
//! Numbers are written with 17 significant digits so a round trip is exact.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::AaBox;

#[derive(Debug, Clone, PartialEq)]
pub enum Entry {
    Scalar(f64),
    Text(String),
    Matrix(DMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    kind: String,
    entries: Vec<(String, Entry)>,
}

fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

impl Document {
    pub fn new(kind: &str) -> Self {
        Self {
            kind: kind.to_string(),
            entries: Vec::new(),
        }
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    fn put(&mut self, key: &str, entry: Entry) {
        assert!(
            !key.is_empty() && !key.contains(char::is_whitespace),
            "document keys are single tokens"
        );
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = entry,
            None => self.entries.push((key.to_string(), entry)),
        }
    }

    pub fn set_scalar(&mut self, key: &str, v: f64) {
        self.put(key, Entry::Scalar(v));
    }

    pub fn set_text(&mut self, key: &str, v: &str) {
        assert!(!v.contains('\n'), "text entries are single-line");
        self.put(key, Entry::Text(v.to_string()));
    }

    pub fn set_matrix(&mut self, key: &str, m: DMatrix<f64>) {
        self.put(key, Entry::Matrix(m));
    }

    /// Stored as a 2×d matrix of `[lo; hi]`.
    pub fn set_box(&mut self, key: &str, b: &AaBox) {
        let d = b.dim();
        let mut m = DMatrix::zeros(2, d);
        for i in 0..d {
            m[(0, i)] = b.lo[i];
            m[(1, i)] = b.hi[i];
        }
        self.set_matrix(key, m);
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, e)| e)
    }

    fn missing(&self, key: &str, what: &str) -> Error {
        Error::Parse {
            line: 0,
            message: format!("{} document has no {what} entry `{key}`", self.kind),
        }
    }

    pub fn scalar(&self, key: &str) -> Result<f64> {
        match self.get(key) {
            Some(Entry::Scalar(v)) => Ok(*v),
            _ => Err(self.missing(key, "scalar")),
        }
    }

    pub fn text(&self, key: &str) -> Result<&str> {
        match self.get(key) {
            Some(Entry::Text(v)) => Ok(v),
            _ => Err(self.missing(key, "text")),
        }
    }

    pub fn matrix(&self, key: &str) -> Result<&DMatrix<f64>> {
        match self.get(key) {
            Some(Entry::Matrix(m)) => Ok(m),
            _ => Err(self.missing(key, "matrix")),
        }
    }

    pub fn aa_box(&self, key: &str) -> Result<AaBox> {
        let m = self.matrix(key)?;
        if m.nrows() != 2 {
            return Err(self.missing(key, "2-row box"));
        }
        AaBox::new(
            m.row(0).iter().copied().collect(),
            m.row(1).iter().copied().collect(),
        )
    }

    pub fn render(&self) -> String {
        let mut out = format!("romcert {}\n", self.kind);
        for (k, e) in &self.entries {
            match e {
                Entry::Scalar(v) => {
                    let _ = writeln!(out, "scalar {k} {}", fmt_num(*v));
                }
                Entry::Text(t) => {
                    let _ = writeln!(out, "text {k} {t}");
                }
                Entry::Matrix(m) => {
                    let _ = writeln!(out, "matrix {k} {} {}", m.nrows(), m.ncols());
                    for r in 0..m.nrows() {
                        let row: Vec<String> = m.row(r).iter().map(|v| fmt_num(*v)).collect();
                        let _ = writeln!(out, "  {}", row.join(" "));
                    }
                }
            }
        }
        out
    }

    pub fn parse(src: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse { line, message };
        let mut lines = src.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (ln, header) = lines
            .by_ref()
            .find(|(_, l)| !l.trim().is_empty())
            .ok_or_else(|| err(1, "empty document".into()))?;
        let kind = header
            .trim()
            .strip_prefix("romcert ")
            .ok_or_else(|| err(ln, format!("expected `romcert <kind>` header, found `{header}`")))?;
        let mut doc = Document::new(kind.trim());

        let num = |line: usize, tok: &str| -> Result<f64> {
            tok.parse::<f64>()
                .map_err(|_| err(line, format!("invalid number `{tok}`")))
        };

        while let Some((ln, raw)) = lines.next() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut toks = line.splitn(3, ' ');
            let tag = toks.next().unwrap_or_default();
            let key = toks
                .next()
                .ok_or_else(|| err(ln, format!("`{tag}` entry has no key")))?;
            let rest = toks.next().unwrap_or("").trim();
            match tag {
                "scalar" => doc.set_scalar(key, num(ln, rest)?),
                "text" => doc.set_text(key, rest),
                "matrix" => {
                    let dims: Vec<&str> = rest.split_whitespace().collect();
                    if dims.len() != 2 {
                        return Err(err(ln, format!("matrix `{key}` needs `rows cols`")));
                    }
                    let parse_dim = |t: &str| {
                        t.parse::<usize>()
                            .map_err(|_| err(ln, format!("invalid dimension `{t}` for `{key}`")))
                    };
                    let (r, c) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
                    let mut m = DMatrix::zeros(r, c);
                    for i in 0..r {
                        let (rl, row) = lines.next().ok_or_else(|| {
                            err(ln, format!("matrix `{key}` truncated at row {}", i + 1))
                        })?;
                        let vals: Vec<&str> = row.split_whitespace().collect();
                        if vals.len() != c {
                            return Err(err(
                                rl,
                                format!("matrix `{key}` row {} has {} values, expected {c}", i + 1, vals.len()),
                            ));
                        }
                        for (j, v) in vals.iter().enumerate() {
                            m[(i, j)] = num(rl, v)?;
                        }
                    }
                    doc.set_matrix(key, m);
                }
                other => return Err(err(ln, format!("unknown entry tag `{other}`"))),
            }
        }
        Ok(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut d = Document::new("test");
        d.set_scalar("x", 0.1 + 0.2);
        d.set_text("mode", "exact derivative");
        d.set_matrix("m", DMatrix::from_row_slice(2, 3, &[1.0, -2.5e-300, 3.0, f64::MIN_POSITIVE, 5.0, 1.0 / 3.0]));
        let back = Document::parse(&d.render()).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.scalar("x").unwrap().to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn reports_line_numbers() {
        let src = "romcert c\nscalar a 1\nmatrix m 2 2\n  1 2\n  3 x\n";
        match Document::parse(src) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 5);
                assert!(message.contains("`x`"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            Document::parse("romcert c\nmatrix m 2 2\n  1 2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(Document::parse("hello"), Err(Error::Parse { line: 1, .. })));
    }
}
