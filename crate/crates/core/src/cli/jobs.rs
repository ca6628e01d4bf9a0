//! Job streams: positive decimals separated by whitespace, read lazily.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::Job;

#[derive(Debug, Error)]
pub enum JobStreamError {
    #[error("job {position}: cannot parse {token:?} as a number")]
    Unparsable { position: usize, token: String },
    #[error("job {position}: processing time must be positive and finite, got {value}")]
    NonPositive { position: usize, value: f64 },
    #[error("reading job stream: {0}")]
    Io(#[from] io::Error),
}

/// Iterator over the jobs of a text stream, ids assigned by position.
pub struct JobReader<R> {
    reader: R,
    line: String,
    tokens: Vec<String>,
    next_token: usize,
    position: usize,
    failed: bool,
}

impl<R: BufRead> JobReader<R> {
    pub fn new(reader: R) -> Self {
        Self {
            reader,
            line: String::new(),
            tokens: Vec::new(),
            next_token: 0,
            position: 0,
            failed: false,
        }
    }

    fn next_raw(&mut self) -> Result<Option<String>, io::Error> {
        while self.next_token == self.tokens.len() {
            self.line.clear();
            if self.reader.read_line(&mut self.line)? == 0 {
                return Ok(None);
            }
            self.tokens = self.line.split_whitespace().map(str::to_owned).collect();
            self.next_token = 0;
        }
        self.next_token += 1;
        Ok(Some(std::mem::take(&mut self.tokens[self.next_token - 1])))
    }
}

impl<R: BufRead> Iterator for JobReader<R> {
    type Item = Result<Job, JobStreamError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let result = match self.next_raw() {
            Ok(None) => return None,
            Err(e) => Err(e.into()),
            Ok(Some(token)) => {
                let position = self.position;
                self.position += 1;
                match token.parse::<f64>() {
                    Err(_) => Err(JobStreamError::Unparsable { position, token }),
                    Ok(value) if !(value > 0.0 && value.is_finite()) => {
                        Err(JobStreamError::NonPositive { position, value })
                    }
                    Ok(value) => Ok(Job::new(position, value)),
                }
            }
        };
        self.failed = result.is_err();
        Some(result)
    }
}

pub fn parse_jobs_str(text: &str) -> Result<Vec<Job>, JobStreamError> {
    JobReader::new(text.as_bytes()).collect()
}

/// Writes one value per line.
pub fn write_jobs<W: Write>(mut out: W, values: impl IntoIterator<Item = f64>) -> io::Result<()> {
    for value in values {
        writeln!(out, "{value}")?;
    }
    out.flush()
}
