//! Deterministic JSON rendering for result documents.
//!
//! Every float is written in `{:.16e}` scientific form: 17 significant
//! digits, enough to round-trip any `f64` exactly, so repeated runs on the
//! same inputs produce byte-identical documents (there are no timestamps,
//! hash maps, or locale-dependent paths anywhere in the output).

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

/// Pretty two-space-indented JSON with round-trip-exact floats.
struct SciPretty<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for SciPretty<'_> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }

    // layout is PrettyFormatter's, unchanged
    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_object_value(writer)
    }
}

/// Single-line JSON with the same exact floats (used for trace streams).
/// The `Formatter` defaults already produce compact layout; only the float
/// encoding needs overriding.
struct SciCompact;

impl Formatter for SciCompact {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Renders a document as pretty JSON with a trailing newline.
pub fn render<T: Serialize>(document: &T) -> Result<String> {
    let mut buffer = Vec::new();
    let formatter = SciPretty {
        inner: PrettyFormatter::new(),
    };
    let mut serializer = Serializer::with_formatter(&mut buffer, formatter);
    document
        .serialize(&mut serializer)
        .context("rendering document")?;
    buffer.push(b'\n');
    Ok(String::from_utf8(buffer).expect("JSON output is UTF-8"))
}

/// Renders one line of a JSONL stream (trailing newline included).
pub fn render_line<T: Serialize>(document: &T) -> Result<String> {
    let mut buffer = Vec::new();
    let mut serializer = Serializer::with_formatter(&mut buffer, SciCompact);
    document
        .serialize(&mut serializer)
        .context("rendering trace line")?;
    buffer.push(b'\n');
    Ok(String::from_utf8(buffer).expect("JSON output is UTF-8"))
}

/// Writes rendered text to `path`, or to stdout when no path was given.
pub fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => io::stdout()
            .write_all(text.as_bytes())
            .context("writing stdout"),
    }
}
