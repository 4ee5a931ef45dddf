use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use subvocab::corpus::{read_lines, MonoCorpus};
use subvocab::{Error, Result};

const CHUNK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

fn stdin_err(e: io::Error) -> Error {
    Error::io("<stdin>", e)
}

fn stdout_err(e: io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn open(input: Option<&Path>) -> Result<Box<dyn BufRead>> {
    Ok(match input {
        Some(p) => Box::new(BufReader::new(File::open(p).map_err(|e| Error::io(p, e))?)),
        None => Box::new(BufReader::new(io::stdin().lock())),
    })
}

fn next_line(reader: &mut dyn BufRead, buf: &mut Vec<u8>, offset: &mut usize) -> Result<Option<String>> {
    buf.clear();
    if reader.read_until(b'\n', buf).map_err(stdin_err)? == 0 {
        return Ok(None);
    }
    let len = buf.len();
    if buf.last() == Some(&b'\n') {
        buf.pop();
        if buf.last() == Some(&b'\r') {
            buf.pop();
        }
    }
    let line = String::from_utf8(std::mem::take(buf)).map_err(|e| Error::Decode {
        path: "<stdin>".into(),
        offset: *offset + e.utf8_error().valid_up_to(),
    })?;
    *offset += len;
    Ok(Some(line))
}

/// Maps every input line to one output line, in parallel chunks.
pub fn stream_lines<F>(input: Option<&Path>, f: F) -> Result<usize>
where
    F: Fn(&str) -> Result<String> + Sync,
{
    let mut reader = open(input)?;
    let mut out = BufWriter::new(io::stdout().lock());
    let (mut buf, mut offset, mut total) = (Vec::new(), 0usize, 0usize);
    loop {
        let mut chunk = Vec::with_capacity(CHUNK);
        while chunk.len() < CHUNK {
            match next_line(reader.as_mut(), &mut buf, &mut offset)? {
                Some(l) => chunk.push(l),
                None => break,
            }
        }
        if chunk.is_empty() {
            break;
        }
        let mapped: Vec<String> = chunk.par_iter().map(|l| f(l)).collect::<Result<_>>()?;
        for line in &mapped {
            out.write_all(line.as_bytes()).map_err(stdout_err)?;
            out.write_all(b"\n").map_err(stdout_err)?;
        }
        total += chunk.len();
        if chunk.len() < CHUNK {
            break;
        }
    }
    out.flush().map_err(stdout_err)?;
    Ok(total)
}

/// All lines of a file, or of standard input when `path` is `None` or `-`.
pub fn read_all(path: Option<&Path>) -> Result<Vec<String>> {
    match path {
        Some(p) if p != Path::new("-") => read_lines(p),
        _ => {
            let mut bytes = Vec::new();
            io::stdin().lock().read_to_end(&mut bytes).map_err(stdin_err)?;
            let text = String::from_utf8(bytes).map_err(|e| Error::Decode {
                path: "<stdin>".into(),
                offset: e.utf8_error().valid_up_to(),
            })?;
            let mut lines: Vec<String> = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l).to_string()).collect();
            if lines.last().is_some_and(String::is_empty) {
                lines.pop();
            }
            Ok(lines)
        }
    }
}

pub fn corpus(paths: &[PathBuf]) -> Result<MonoCorpus> {
    let mut sentences = Vec::new();
    for p in paths {
        sentences.extend(read_all(Some(p))?);
    }
    Ok(MonoCorpus::new(sentences))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn tsv_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(tsv_cell).collect::<Vec<_>>().join(","),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Writes a report to stdout: pretty JSON, or `key<TAB>value` rows.
pub fn emit<T: Serialize>(report: &T, format: Format) -> Result<()> {
    let value = serde_json::to_value(report)?;
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&value)? + "\n",
        Format::Tsv => match &value {
            Value::Object(map) => map.iter().map(|(k, v)| format!("{k}\t{}\n", tsv_cell(v))).collect(),
            other => tsv_cell(other) + "\n",
        },
    };
    emit_raw(&text)
}

pub fn emit_raw(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes()).map_err(stdout_err)?;
    out.flush().map_err(stdout_err)
}
