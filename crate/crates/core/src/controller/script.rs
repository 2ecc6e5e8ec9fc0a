//! Command-stream files.
//!
//! Two forms are accepted:
//!
//! * binary: a bare sequence of 4-byte frames, applied back to back at the
//!   serial frame period;
//! * text: one input per line, `<time_s> <OPCODE> <cell> <payload_hex>`.
//!   `TRIGGER` and `TICK` lines carry trigger edges and clock ticks; their
//!   cell and payload columns may be omitted. `#` starts a comment.

use std::fmt::Write as _;
use thiserror::Error;

use super::command::{parse_frame, Command, FrameError, Opcode};
use super::fsm::Input;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScriptError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Frame {
        line: usize,
        #[source]
        source: FrameError,
    },
    #[error("binary stream length {0} is not a multiple of 4")]
    Truncated(usize),
    #[error("line {line}: time {t} precedes previous line")]
    NonMonotonic { line: usize, t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedInput {
    pub t: f64,
    pub input: Input,
}

pub fn parse_text_script(src: &str) -> Result<Vec<TimedInput>, ScriptError> {
    let mut out = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (n, raw) in src.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        let syntax = |msg: String| ScriptError::Syntax { line, msg };
        let t: f64 = fields[0]
            .parse()
            .map_err(|_| syntax(format!("bad time `{}`", fields[0])))?;
        if !t.is_finite() || t < last {
            return Err(ScriptError::NonMonotonic { line, t });
        }
        last = t;
        let op = fields
            .get(1)
            .ok_or_else(|| syntax("missing opcode".into()))?;
        let input = match op.to_ascii_uppercase().as_str() {
            "TRIGGER" => Input::TriggerEdge,
            "TICK" => Input::ClockTick,
            name => {
                let opcode: Opcode = name.parse().map_err(syntax)?;
                let cell = fields
                    .get(2)
                    .ok_or_else(|| syntax("missing cell".into()))?;
                let cell: u8 = cell
                    .parse()
                    .map_err(|_| syntax(format!("bad cell `{cell}`")))?;
                let payload = fields
                    .get(3)
                    .ok_or_else(|| syntax("missing payload".into()))?;
                let hex = payload.trim_start_matches("0x").trim_start_matches("0X");
                let payload = u16::from_str_radix(hex, 16)
                    .map_err(|_| syntax(format!("bad payload `{payload}`")))?;
                let cmd = Command::new(opcode, cell, payload)
                    .map_err(|source| ScriptError::Frame { line, source })?;
                Input::Command(cmd)
            }
        };
        if fields.len() > 4 {
            return Err(syntax("trailing fields".into()));
        }
        out.push(TimedInput { t, input });
    }
    Ok(out)
}

pub fn format_text_script(inputs: &[TimedInput]) -> String {
    let mut s = String::new();
    for ti in inputs {
        match ti.input {
            Input::TriggerEdge => writeln!(s, "{:e} TRIGGER", ti.t),
            Input::ClockTick => writeln!(s, "{:e} TICK", ti.t),
            Input::Command(c) => writeln!(
                s,
                "{:e} {} {} {:04X}",
                ti.t,
                c.opcode(),
                c.cell_addr(),
                c.raw_payload()
            ),
        }
        .expect("writing to a String cannot fail");
    }
    s
}

/// Frames applied at `k * frame_period`.
pub fn parse_binary_stream(bytes: &[u8], frame_period: f64) -> Result<Vec<TimedInput>, ScriptError> {
    if bytes.len() % 4 != 0 {
        return Err(ScriptError::Truncated(bytes.len()));
    }
    bytes
        .chunks_exact(4)
        .enumerate()
        .map(|(k, frame)| {
            let cmd = parse_frame(frame).map_err(|source| ScriptError::Frame { line: k + 1, source })?;
            Ok(TimedInput {
                t: k as f64 * frame_period,
                input: Input::Command(cmd),
            })
        })
        .collect()
}

/// Text scripts start with a digit, sign or comment; anything else is binary.
pub fn looks_like_text(bytes: &[u8]) -> bool {
    std::str::from_utf8(bytes).is_ok_and(|s| {
        s.trim_start()
            .chars()
            .next()
            .is_none_or(|c| c.is_ascii_digit() || matches!(c, '#' | '.' | '+' | '-'))
    })
}
