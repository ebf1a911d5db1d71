//! Entity identifiers: an 8-bit kind prefix juxtaposed with a 64-bit
//! nanosecond clock reading and a 56-bit random payload (128 bits total).
//! Vertex and edge ids carry distinct prefixes so the two id spaces never
//! compare as equal.

use core::fmt;
use core::str::FromStr;

use rand_core::RngCore;

/// Mask for the 56-bit random payload.
const RANDOM_MASK: u64 = (1 << 56) - 1;

/// Distinguishes vertex ids from edge ids by prefix.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
pub enum IdKind {
    Vertex,
    Edge,
}

impl IdKind {
    /// The 8-bit tag prefixed to ids of this kind.
    pub const fn prefix(self) -> u8 {
        match self {
            IdKind::Vertex => 0x01,
            IdKind::Edge => 0x02,
        }
    }

    fn from_prefix(prefix: u8) -> Option<Self> {
        match prefix {
            0x01 => Some(IdKind::Vertex),
            0x02 => Some(IdKind::Edge),
            _ => None,
        }
    }
}

/// A 128-bit entity identifier.
///
/// Ordering is derived on (kind, timestamp, random); within one kind that is
/// the total order by (timestamp_ns, random). The `Display`/`FromStr` form is
/// 32 lowercase hex digits whose lexicographic order matches `Ord`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId {
    kind: IdKind,
    timestamp_ns: u64,
    random: u64,
}

impl EntityId {
    /// Assembles an id from raw parts; the random payload is truncated to 56 bits.
    pub fn from_parts(kind: IdKind, timestamp_ns: u64, random: u64) -> Self {
        EntityId {
            kind,
            timestamp_ns,
            random: random & RANDOM_MASK,
        }
    }

    pub fn kind(&self) -> IdKind {
        self.kind
    }

    pub fn kind_prefix(&self) -> u8 {
        self.kind.prefix()
    }

    pub fn timestamp_ns(&self) -> u64 {
        self.timestamp_ns
    }

    pub fn random(&self) -> u64 {
        self.random
    }

    pub fn is_vertex(&self) -> bool {
        self.kind == IdKind::Vertex
    }

    pub fn is_edge(&self) -> bool {
        self.kind == IdKind::Edge
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:02x}{:016x}{:014x}",
            self.kind.prefix(),
            self.timestamp_ns,
            self.random
        )
    }
}

/// Reasons an id string fails to parse.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseIdError {
    #[error("entity id must be 32 hex digits")]
    BadLength,
    #[error("entity id contains a non-hex digit")]
    BadDigit,
    #[error("unknown id kind prefix {0:#04x}")]
    BadPrefix(u8),
}

impl FromStr for EntityId {
    type Err = ParseIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != 32 || !s.is_ascii() {
            return Err(ParseIdError::BadLength);
        }
        let parse = |range: core::ops::Range<usize>| {
            u64::from_str_radix(&s[range], 16).map_err(|_| ParseIdError::BadDigit)
        };
        let prefix = parse(0..2)? as u8;
        let kind = IdKind::from_prefix(prefix).ok_or(ParseIdError::BadPrefix(prefix))?;
        let timestamp_ns = parse(2..18)?;
        let random = parse(18..32)?;
        Ok(EntityId::from_parts(kind, timestamp_ns, random))
    }
}

impl serde::Serialize for EntityId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for EntityId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <alloc::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A nanosecond-resolution time source.
///
/// Injected rather than read from the host so deterministic stubs can drive
/// id generation in tests and replay tooling.
pub trait NanoClock {
    fn now_ns(&mut self) -> u64;
}

/// A clock frozen at one instant.
#[derive(Debug, Clone, Copy)]
pub struct FixedClock(pub u64);

impl NanoClock for FixedClock {
    fn now_ns(&mut self) -> u64 {
        self.0
    }
}

/// A clock advancing by a fixed step per reading.
#[derive(Debug, Clone, Copy)]
pub struct StepClock {
    next: u64,
    step: u64,
}

impl StepClock {
    pub fn new(start: u64, step: u64) -> Self {
        StepClock { next: start, step }
    }
}

impl NanoClock for StepClock {
    fn now_ns(&mut self) -> u64 {
        let now = self.next;
        self.next = self.next.wrapping_add(self.step);
        now
    }
}

/// Generates pseudo-unique ids by juxtaposing fresh randomness with the
/// current nanosecond clock reading.
pub struct IdGenerator {
    clock: alloc::boxed::Box<dyn NanoClock + Send>,
    rng: alloc::boxed::Box<dyn RngCore + Send>,
}

impl fmt::Debug for IdGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IdGenerator").finish_non_exhaustive()
    }
}

impl IdGenerator {
    pub fn new(clock: impl NanoClock + Send + 'static, rng: impl RngCore + Send + 'static) -> Self {
        IdGenerator {
            clock: alloc::boxed::Box::new(clock),
            rng: alloc::boxed::Box::new(rng),
        }
    }

    /// Draws an id of the given kind, re-drawing while `taken` reports a
    /// collision. Each retry re-reads the clock and the randomness source and
    /// additionally offsets the random payload by the attempt count, so the
    /// loop terminates even against a constant clock and constant randomness.
    pub fn generate(&mut self, kind: IdKind, mut taken: impl FnMut(EntityId) -> bool) -> EntityId {
        let mut attempt: u64 = 0;
        loop {
            let ts = self.clock.now_ns();
            let random = self.rng.next_u64().wrapping_add(attempt) & RANDOM_MASK;
            let id = EntityId::from_parts(kind, ts, random);
            if !taken(id) {
                return id;
            }
            attempt += 1;
        }
    }
}
