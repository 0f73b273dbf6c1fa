use std::fmt;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CommandKind {
    Activate,
    Precharge,
    Read,
    Write,
    /// All-bank refresh.
    Refresh,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Activate => "ACT",
            CommandKind::Precharge => "PRE",
            CommandKind::Read => "RD",
            CommandKind::Write => "WR",
            CommandKind::Refresh => "REFab",
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One command on the command bus. For `PRE` the row is the one being
/// closed; `REFab` carries zeros.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Command {
    pub cycle: u64,
    pub kind: CommandKind,
    pub bank: u32,
    pub row: u32,
    pub column: u32,
}

/// Receives every command a simulation issues, in issue order.
pub trait CommandSink {
    fn record(&mut self, cmd: &Command);
}

impl CommandSink for Vec<Command> {
    fn record(&mut self, cmd: &Command) {
        self.push(*cmd);
    }
}

/// Drops everything.
pub struct NullSink;

impl CommandSink for NullSink {
    fn record(&mut self, _: &Command) {}
}

/// Writes `cycle,command,bank,row,column` lines. Write errors are kept and
/// reported by [`TraceWriter::finish`].
pub struct TraceWriter<W: Write> {
    out: W,
    error: Option<std::io::Error>,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(mut out: W) -> Self {
        let error = writeln!(out, "cycle,command,bank,row,column").err();
        TraceWriter { out, error }
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        if let Some(e) = self.error {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> CommandSink for TraceWriter<W> {
    fn record(&mut self, c: &Command) {
        if self.error.is_none() {
            self.error = writeln!(
                self.out,
                "{},{},{},{},{}",
                c.cycle, c.kind, c.bank, c.row, c.column
            )
            .err();
        }
    }
}

/// Fans one command stream out to two sinks.
pub struct Tee<'a, A: ?Sized, B: ?Sized>(pub &'a mut A, pub &'a mut B);

impl<A: CommandSink + ?Sized, B: CommandSink + ?Sized> CommandSink for Tee<'_, A, B> {
    fn record(&mut self, cmd: &Command) {
        self.0.record(cmd);
        self.1.record(cmd);
    }
}
