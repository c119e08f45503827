use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;

use super::grid::WavepacketState;

/// Writes `|ψ|²` snapshots as whitespace-separated `x density` columns, one
/// block per snapshot headed by `# t = ...` and separated by a blank line.
pub struct FrameWriter<W: Write> {
    out: W,
    every: usize,
    stride: usize,
    calls: usize,
}

impl FrameWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>, every: usize, stride: usize) -> Result<Self> {
        Ok(Self::new(
            BufWriter::new(File::create(path)?),
            every,
            stride,
        ))
    }
}

impl<W: Write> FrameWriter<W> {
    /// Keep every `every`-th observed state and every `stride`-th grid point.
    pub fn new(out: W, every: usize, stride: usize) -> Self {
        Self {
            out,
            every: every.max(1),
            stride: stride.max(1),
            calls: 0,
        }
    }

    pub fn observe(&mut self, state: &WavepacketState) -> Result<()> {
        let keep = self.calls.is_multiple_of(self.every);
        self.calls += 1;
        if keep {
            self.write(state)?;
        }
        Ok(())
    }

    pub fn write(&mut self, state: &WavepacketState) -> Result<()> {
        writeln!(self.out, "# t = {:.16e}", state.t)?;
        for (x, d) in state.density().step_by(self.stride) {
            writeln!(self.out, "{x:.16e} {d:.16e}")?;
        }
        writeln!(self.out)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}
