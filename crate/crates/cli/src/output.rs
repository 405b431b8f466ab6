//! JSON encoding: matrices as nested [re, im] pairs, floats with 17
//! significant digits so that values round-trip exactly.

use std::io;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::ser::Formatter;

use tempocorr::CMat;

use crate::spec::SPEC_FORMAT;
use crate::CliError;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn to_json_matrix(m: &CMat) -> JsonMatrix {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn from_json_matrix(m: &JsonMatrix) -> Result<CMat, CliError> {
    let rows: Vec<Vec<Complex64>> = m
        .iter()
        .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .collect();
    CMat::from_rows(&rows).map_err(|e| CliError::Parse(format!("matrix: {e}")))
}

/// Indented JSON in which arrays nested directly in arrays stay on one line
/// (so a matrix prints one row per line), with floats written as `{:.16e}`.
#[derive(Default)]
struct Layout {
    /// (inline, has_value) per open array or object.
    open: Vec<(bool, bool)>,
    open_is_array: Vec<bool>,
}

impl Layout {
    fn push(&mut self, is_array: bool) -> bool {
        let inline = match (self.open.last(), self.open_is_array.last()) {
            (Some(&(parent_inline, _)), Some(&parent_array)) => parent_inline || (is_array && parent_array),
            _ => false,
        };
        self.open.push((inline, false));
        self.open_is_array.push(is_array);
        inline
    }

    fn pop(&mut self) -> (bool, bool) {
        self.open_is_array.pop();
        self.open.pop().expect("balanced brackets")
    }

    fn depth(&self) -> usize {
        self.open.iter().filter(|f| !f.0).count()
    }

    fn separator<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        let inline = self.open.last().is_some_and(|f| f.0);
        if inline {
            if !first {
                writer.write_all(b", ")?;
            }
            return Ok(());
        }
        writer.write_all(if first { b"\n" } else { b",\n" })?;
        self.indent(writer, self.depth())
    }

    fn indent<W: ?Sized + io::Write>(&self, writer: &mut W, level: usize) -> io::Result<()> {
        for _ in 0..level {
            writer.write_all(b"  ")?;
        }
        Ok(())
    }

    fn close<W: ?Sized + io::Write>(&mut self, writer: &mut W, bracket: &[u8]) -> io::Result<()> {
        let (inline, has_value) = self.pop();
        if !inline && has_value {
            writer.write_all(b"\n")?;
            self.indent(writer, self.depth())?;
        }
        writer.write_all(bracket)
    }

    fn mark_value(&mut self) {
        if let Some(f) = self.open.last_mut() {
            f.1 = true;
        }
    }
}

impl Formatter for Layout {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.push(true);
        writer.write_all(b"[")
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.close(writer, b"]")
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.separator(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, _writer: &mut W) -> io::Result<()> {
        self.mark_value();
        Ok(())
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.push(false);
        writer.write_all(b"{")
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.close(writer, b"}")
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.separator(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        writer.write_all(b": ")
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, _writer: &mut W) -> io::Result<()> {
        self.mark_value();
        Ok(())
    }
}

/// Serializes with fixed formatting and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Layout::default());
    value.serialize(&mut ser).expect("in-memory serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

#[derive(Serialize)]
pub struct Versions {
    pub tempocorr: &'static str,
    pub cli: &'static str,
    pub spec_format: &'static str,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            tempocorr: tempocorr::VERSION,
            cli: env!("CARGO_PKG_VERSION"),
            spec_format: SPEC_FORMAT,
        }
    }
}

#[derive(Serialize)]
pub struct Envelope<I: Serialize, O: Serialize> {
    pub command: &'static str,
    pub inputs: I,
    pub outputs: O,
    pub versions: Versions,
}

pub fn envelope<I: Serialize, O: Serialize>(command: &'static str, inputs: I, outputs: O) -> String {
    to_json(&Envelope {
        command,
        inputs,
        outputs,
        versions: Versions::current(),
    })
}

/// CSV with a header row; values use the same 17-digit format as the JSON.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}
