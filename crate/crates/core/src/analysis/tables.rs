//! Key-size tables over the five bases and five entropy lengths.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::analysis::keyspace::key_space_for_key_bits;
use crate::error::{Error, Result};
use crate::keygen::{expected_element_count, Base};

pub const KEY_BITS: [u64; 5] = [64, 128, 256, 512, 1024];

/// Cells where a widely reproduced bit-count figure disagrees with the exact
/// value: `(base, key_bits, quoted)`.
pub const QUOTED_BITS_MISMATCHES: &[(Base, u64, u64)] = &[(Base::Decimal, 512, 128)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    /// Average digit count per key.
    Elements,
    /// Key-space size, 3 significant digits.
    Permutations,
    /// `floor(log2)` of the key-space size.
    Bits,
}

impl FromStr for TableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "elements" => Ok(TableKind::Elements),
            "permutations" => Ok(TableKind::Permutations),
            "bits" => Ok(TableKind::Bits),
            other => Err(Error::InvalidArgument(format!("unknown table kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub kind: TableKind,
    pub rows: Vec<(Base, Vec<String>)>,
    pub footnotes: Vec<String>,
}

impl Table {
    pub fn cell(&self, base: Base, key_bits: u64) -> Option<&str> {
        let col = KEY_BITS.iter().position(|&b| b == key_bits)?;
        self.rows
            .iter()
            .find(|(b, _)| *b == base)
            .map(|(_, cells)| cells[col].as_str())
    }

    /// Aligned text with a header row and any footnotes.
    pub fn render_text(&self) -> String {
        let header: Vec<String> = KEY_BITS.iter().map(|b| format!("{b}-bit")).collect();
        let name_w = self.rows.iter().map(|(b, _)| b.name().len()).max().unwrap_or(0);
        let widths: Vec<usize> = (0..KEY_BITS.len())
            .map(|c| {
                self.rows
                    .iter()
                    .map(|(_, cells)| cells[c].len())
                    .chain([header[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();

        let mut out = String::new();
        let _ = write!(out, "{:name_w$}", "");
        for (h, w) in header.iter().zip(&widths) {
            let _ = write!(out, "  {h:>w$}");
        }
        out.push('\n');
        for (base, cells) in &self.rows {
            let _ = write!(out, "{:name_w$}", base.name());
            for (c, w) in cells.iter().zip(&widths) {
                let _ = write!(out, "  {c:>w$}");
            }
            out.push('\n');
        }
        for note in &self.footnotes {
            let _ = writeln!(out, "* {note}");
        }
        out
    }

    /// `base,64,128,...` header then one row per base, LF line endings.
    pub fn render_csv(&self) -> String {
        let mut out = String::from("base");
        for b in KEY_BITS {
            let _ = write!(out, ",{b}");
        }
        out.push('\n');
        for (base, cells) in &self.rows {
            out.push_str(base.name());
            for c in cells {
                out.push(',');
                out.push_str(c);
            }
            out.push('\n');
        }
        out
    }
}

pub fn tables(kind: TableKind) -> Table {
    let mut rows = Vec::with_capacity(Base::ALL.len());
    for base in Base::ALL {
        let cells = KEY_BITS
            .iter()
            .map(|&bits| match kind {
                TableKind::Elements => expected_element_count(base, bits).to_string(),
                TableKind::Permutations => key_space_for_key_bits(base, bits)
                    .expect("non-empty key")
                    .scientific(),
                TableKind::Bits => key_space_for_key_bits(base, bits)
                    .expect("non-empty key")
                    .bits
                    .to_string(),
            })
            .collect();
        rows.push((base, cells));
    }
    let mut footnotes = Vec::new();
    if kind == TableKind::Bits {
        for &(base, bits, quoted) in QUOTED_BITS_MISMATCHES {
            let r = key_space_for_key_bits(base, bits).expect("non-empty key");
            footnotes.push(format!(
                "{base} {bits}-bit: {} digits over {} symbols give {} bits; the figure {quoted} sometimes quoted for this cell is inconsistent",
                r.kappa,
                base.max_digit(),
                r.bits
            ));
        }
    }
    Table { kind, rows, footnotes }
}
