//! Serial command frames.
//!
//! Every frame is four bytes, most-significant byte first:
//!
//! ```text
//! [opcode:8][cell_addr:8][payload:16 big-endian]
//! ```
//!
//! The payload is kept verbatim so that `encode(parse_frame(b)) == b` holds for
//! every accepted frame. Its physical meaning depends on the opcode:
//!
//! | opcode             | payload                                               |
//! |--------------------|-------------------------------------------------------|
//! | `SET_HOLD`         | hold code, `volts = code * 3 V / 32768`, code ≤ 32768 |
//! | `SET_LEVELS`       | `[v_high:8][v_low:8]`, 12.5 mV per step, each ≤ 240   |
//! | `LOCK` / `UNLOCK`  | ignored                                               |
//! | `ARM`              | bit 0 selects the trigger source (0 external)         |
//! | `OSC_CONFIG`       | `[en:1][tap:3][trim:4][divider:8]`, divider ≥ 1       |
//! | `ARTIFICIAL_POWER` | `watts = code * 100 nW`                               |
//! | `QUERY`            | ignored                                               |

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use super::NUM_CELLS;

/// Full-scale hold voltage.
pub const HOLD_FULL_SCALE: f64 = 3.0;
/// Hold code corresponding to [`HOLD_FULL_SCALE`].
pub const HOLD_MAX_CODE: u16 = 32768;
/// One LSB of the hold DAC.
pub const HOLD_LSB: f64 = HOLD_FULL_SCALE / HOLD_MAX_CODE as f64;
/// One LSB of the pulse-level DACs.
pub const LEVEL_LSB: f64 = 0.0125;
/// Largest accepted pulse-level code (3.0 V).
pub const LEVEL_MAX_CODE: u8 = 240;
/// One LSB of the artificial heater setting.
pub const ARTIFICIAL_LSB: f64 = 100e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("frame must be exactly 4 bytes, got {0}")]
    WrongLength(usize),
    #[error("unknown opcode 0x{0:02X}")]
    UnknownOpcode(u8),
    #[error("cell address {0} out of range (0..{max})", max = NUM_CELLS)]
    AddressOutOfRange(u8),
    #[error("invalid payload 0x{payload:04X} for {opcode}: {reason}")]
    InvalidPayload {
        opcode: Opcode,
        payload: u16,
        reason: &'static str,
    },
    #[error("value {value} cannot be encoded for {opcode}")]
    Unencodable { opcode: Opcode, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
#[repr(u8)]
pub enum Opcode {
    SetHold = 0x01,
    SetLevels = 0x02,
    Lock = 0x03,
    Unlock = 0x04,
    Arm = 0x05,
    OscConfig = 0x06,
    ArtificialPower = 0x07,
    Query = 0x08,
}

impl Opcode {
    pub const ALL: [Opcode; 8] = [
        Opcode::SetHold,
        Opcode::SetLevels,
        Opcode::Lock,
        Opcode::Unlock,
        Opcode::Arm,
        Opcode::OscConfig,
        Opcode::ArtificialPower,
        Opcode::Query,
    ];

    pub fn from_byte(b: u8) -> Result<Self, FrameError> {
        Self::ALL
            .iter()
            .copied()
            .find(|op| *op as u8 == b)
            .ok_or(FrameError::UnknownOpcode(b))
    }

    /// Opcodes whose address byte names a CLFG cell.
    pub fn is_per_cell(self) -> bool {
        !matches!(self, Opcode::OscConfig | Opcode::ArtificialPower)
    }

    pub fn name(self) -> &'static str {
        match self {
            Opcode::SetHold => "SET_HOLD",
            Opcode::SetLevels => "SET_LEVELS",
            Opcode::Lock => "LOCK",
            Opcode::Unlock => "UNLOCK",
            Opcode::Arm => "ARM",
            Opcode::OscConfig => "OSC_CONFIG",
            Opcode::ArtificialPower => "ARTIFICIAL_POWER",
            Opcode::Query => "QUERY",
        }
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Opcode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|op| op.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown opcode name `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TriggerSource {
    External,
    Internal,
}

/// Oscillator register contents carried by an `OSC_CONFIG` frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OscSettings {
    pub enabled: bool,
    /// 3-bit inverter-chain tap.
    pub tap_select: u8,
    /// 4-bit delay trim.
    pub trim_bits: u8,
    /// Output divider, 1..=255.
    pub divider: u8,
}

impl OscSettings {
    fn to_payload(self) -> u16 {
        ((self.enabled as u16) << 15)
            | (((self.tap_select & 0x7) as u16) << 12)
            | (((self.trim_bits & 0xF) as u16) << 8)
            | self.divider as u16
    }

    fn from_payload(p: u16) -> Self {
        OscSettings {
            enabled: p & 0x8000 != 0,
            tap_select: ((p >> 12) & 0x7) as u8,
            trim_bits: ((p >> 8) & 0xF) as u8,
            divider: (p & 0xFF) as u8,
        }
    }
}

/// Physical meaning of a validated payload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payload {
    HoldVolts(f64),
    Levels { v_high: f64, v_low: f64 },
    Trigger(TriggerSource),
    Oscillator(OscSettings),
    Watts(f64),
    None,
}

/// A validated command frame.
///
/// Constructed only through [`parse_frame`], [`Command::new`] or one of the
/// typed constructors, so the payload is always decodable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Command {
    opcode: Opcode,
    cell_addr: u8,
    payload: u16,
}

impl Command {
    pub fn new(opcode: Opcode, cell_addr: u8, payload: u16) -> Result<Self, FrameError> {
        if opcode.is_per_cell() && cell_addr as usize >= NUM_CELLS {
            return Err(FrameError::AddressOutOfRange(cell_addr));
        }
        let invalid = |reason| FrameError::InvalidPayload {
            opcode,
            payload,
            reason,
        };
        match opcode {
            Opcode::SetHold if payload > HOLD_MAX_CODE => {
                return Err(invalid("hold code above full scale"))
            }
            Opcode::SetLevels
                if (payload >> 8) as u8 > LEVEL_MAX_CODE
                    || (payload & 0xFF) as u8 > LEVEL_MAX_CODE =>
            {
                return Err(invalid("level code above full scale"))
            }
            Opcode::Arm if payload > 1 => return Err(invalid("trigger source must be 0 or 1")),
            Opcode::OscConfig if payload & 0xFF == 0 => {
                return Err(invalid("divider must be in 1..=255"))
            }
            _ => {}
        }
        Ok(Command {
            opcode,
            cell_addr,
            payload,
        })
    }

    pub fn opcode(&self) -> Opcode {
        self.opcode
    }

    pub fn cell_addr(&self) -> u8 {
        self.cell_addr
    }

    pub fn raw_payload(&self) -> u16 {
        self.payload
    }

    pub fn cell(&self) -> usize {
        self.cell_addr as usize
    }

    pub fn payload(&self) -> Payload {
        let p = self.payload;
        match self.opcode {
            Opcode::SetHold => Payload::HoldVolts(p as f64 * HOLD_LSB),
            Opcode::SetLevels => Payload::Levels {
                v_high: (p >> 8) as f64 * LEVEL_LSB,
                v_low: (p & 0xFF) as f64 * LEVEL_LSB,
            },
            Opcode::Arm => Payload::Trigger(if p & 1 == 1 {
                TriggerSource::Internal
            } else {
                TriggerSource::External
            }),
            Opcode::OscConfig => Payload::Oscillator(OscSettings::from_payload(p)),
            Opcode::ArtificialPower => Payload::Watts(p as f64 * ARTIFICIAL_LSB),
            Opcode::Lock | Opcode::Unlock | Opcode::Query => Payload::None,
        }
    }

    pub fn encode(&self) -> [u8; 4] {
        let [hi, lo] = self.payload.to_be_bytes();
        [self.opcode as u8, self.cell_addr, hi, lo]
    }

    pub fn set_hold(cell: u8, volts: f64) -> Result<Self, FrameError> {
        let code = quantize(volts, HOLD_LSB, HOLD_MAX_CODE as f64).ok_or(
            FrameError::Unencodable {
                opcode: Opcode::SetHold,
                value: volts,
            },
        )?;
        Self::new(Opcode::SetHold, cell, code as u16)
    }

    pub fn set_levels(cell: u8, v_high: f64, v_low: f64) -> Result<Self, FrameError> {
        let enc = |v| {
            quantize(v, LEVEL_LSB, LEVEL_MAX_CODE as f64).ok_or(FrameError::Unencodable {
                opcode: Opcode::SetLevels,
                value: v,
            })
        };
        let (h, l) = (enc(v_high)?, enc(v_low)?);
        Self::new(Opcode::SetLevels, cell, ((h as u16) << 8) | l as u16)
    }

    pub fn lock(cell: u8) -> Result<Self, FrameError> {
        Self::new(Opcode::Lock, cell, 0)
    }

    pub fn unlock(cell: u8) -> Result<Self, FrameError> {
        Self::new(Opcode::Unlock, cell, 0)
    }

    pub fn arm(cell: u8, source: TriggerSource) -> Result<Self, FrameError> {
        Self::new(
            Opcode::Arm,
            cell,
            matches!(source, TriggerSource::Internal) as u16,
        )
    }

    pub fn query(cell: u8) -> Result<Self, FrameError> {
        Self::new(Opcode::Query, cell, 0)
    }

    pub fn osc_config(settings: OscSettings) -> Result<Self, FrameError> {
        if settings.tap_select > 7 || settings.trim_bits > 15 {
            return Err(FrameError::InvalidPayload {
                opcode: Opcode::OscConfig,
                payload: settings.to_payload(),
                reason: "tap or trim out of range",
            });
        }
        Self::new(Opcode::OscConfig, 0, settings.to_payload())
    }

    pub fn artificial_power(watts: f64) -> Result<Self, FrameError> {
        let code = quantize(watts, ARTIFICIAL_LSB, u16::MAX as f64).ok_or(
            FrameError::Unencodable {
                opcode: Opcode::ArtificialPower,
                value: watts,
            },
        )?;
        Self::new(Opcode::ArtificialPower, 0, code as u16)
    }
}

fn quantize(value: f64, lsb: f64, max_code: f64) -> Option<f64> {
    let code = (value / lsb).round();
    (value.is_finite() && (0.0..=max_code).contains(&code)).then_some(code)
}

/// Decode one 4-byte frame.
pub fn parse_frame(bytes: &[u8]) -> Result<Command, FrameError> {
    let &[op, addr, hi, lo] = bytes else {
        return Err(FrameError::WrongLength(bytes.len()));
    };
    Command::new(Opcode::from_byte(op)?, addr, u16::from_be_bytes([hi, lo]))
}

/// Encode a command back to its wire form.
pub fn encode(cmd: &Command) -> [u8; 4] {
    cmd.encode()
}
