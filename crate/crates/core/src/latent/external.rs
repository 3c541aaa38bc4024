use super::{Generator, LatentError, LatentVector};
use crate::codec::{CodecError, GeometryImage};
use std::io::{ErrorKind, Write};
use std::process::{Command, Stdio};
use std::sync::Mutex;

/// A generator implemented by an external program.
///
/// Each call spawns `program args...`, writes the latent to its stdin as a
/// little-endian `u32` count followed by that many little-endian `f32`
/// values, and reads one GEOIMG01 blob (with a `rad` channel) from its
/// stdout. Calls are serialized, one request in flight at a time.
#[derive(Debug)]
pub struct ExternalGenerator {
    program: String,
    args: Vec<String>,
    latent_dim: usize,
    resolution: usize,
    lock: Mutex<()>,
}

impl ExternalGenerator {
    /// Probes the program once with the zero latent to learn its output
    /// resolution.
    pub fn new(program: impl Into<String>, args: Vec<String>, latent_dim: usize) -> Result<Self, LatentError> {
        let mut g = Self {
            program: program.into(),
            args,
            latent_dim,
            resolution: 0,
            lock: Mutex::new(()),
        };
        g.resolution = g.call(&LatentVector::zeros(latent_dim))?.resolution();
        Ok(g)
    }

    /// Splits a command line on whitespace; no shell quoting.
    pub fn from_command_line(command: &str, latent_dim: usize) -> Result<Self, LatentError> {
        let mut parts = command.split_whitespace().map(str::to_string);
        let program = parts
            .next()
            .ok_or_else(|| LatentError::InvalidParameter("empty generator command".into()))?;
        Self::new(program, parts.collect(), latent_dim)
    }

    fn call(&self, w: &LatentVector) -> Result<GeometryImage, LatentError> {
        w.check_dim(self.latent_dim)?;
        let mut request = Vec::with_capacity(4 + 4 * w.dim());
        request.extend_from_slice(&(w.dim() as u32).to_le_bytes());
        for &v in w.values() {
            request.extend_from_slice(&(v as f32).to_le_bytes());
        }

        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| LatentError::ProcessFailure {
                status: "spawn failed".into(),
                stderr: format!("{}: {e}", self.program),
            })?;
        let mut stdin = child.stdin.take().expect("stdin is piped");
        // write from a separate thread so a child that streams output before
        // draining its input cannot deadlock against us
        let writer = std::thread::spawn(move || match stdin.write_all(&request) {
            Err(e) if e.kind() == ErrorKind::BrokenPipe => Ok(()),
            other => other,
        });
        let output = child.wait_with_output()?;
        let written = writer.join().expect("stdin writer does not panic");
        if !output.status.success() {
            return Err(LatentError::ProcessFailure {
                status: output.status.to_string(),
                stderr: String::from_utf8_lossy(&output.stderr).trim_end().to_string(),
            });
        }
        written?;
        let gi = GeometryImage::from_bytes(&output.stdout).map_err(|e| match e {
            CodecError::BadMagic | CodecError::Truncated { .. } | CodecError::TrailingBytes(_) | CodecError::NotSquare { .. } => {
                LatentError::ProtocolViolation(e.to_string())
            }
            other => LatentError::Codec(other),
        })?;
        if gi.rad().is_err() {
            return Err(LatentError::ProtocolViolation("output has no `rad` channel".into()));
        }
        if self.resolution != 0 && gi.resolution() != self.resolution {
            return Err(LatentError::ProtocolViolation(format!(
                "resolution changed from {} to {}",
                self.resolution,
                gi.resolution()
            )));
        }
        Ok(gi)
    }
}

impl Generator for ExternalGenerator {
    fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    fn resolution(&self) -> usize {
        self.resolution
    }

    fn generate_raw(&self, w: &LatentVector) -> Result<Vec<f64>, LatentError> {
        let gi = self.call(w)?;
        Ok(gi.rad()?.to_vec())
    }
}
