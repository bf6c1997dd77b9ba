//! Single-slot latest-value mailboxes emulating one-sided remote writes.
//!
//! Each mailbox connects one writer to one reader through three rotating
//! buffers: the writer always owns a private back buffer, the reader a
//! private front buffer, and the shared `ready` word hands buffers over
//! atomically. A write never waits for the reader and a read never waits for
//! the writer; a completed read always returns a payload written whole by a
//! single `put`. Versions are monotone and the reader only observes strictly
//! increasing ones.
//!
//! Buffer exclusivity is a protocol invariant; each slot still sits behind a
//! mutex whose uncontended `try_lock` doubles as a loud assertion of that
//! invariant. Payloads carry a checksum that is verified on every read.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use nalgebra::DVector;

#[derive(Debug, Default)]
struct Slot {
    data: DVector<f64>,
    version: u64,
    src_iter: usize,
    checksum: u64,
}

#[derive(Debug)]
struct Shared {
    slots: [Mutex<Slot>; 3],
    /// Packed `(version << 2) | slot_index` of the most recently published
    /// buffer.
    ready: AtomicU64,
}

fn pack(version: u64, slot: usize) -> u64 {
    (version << 2) | slot as u64
}

fn unpack(word: u64) -> (u64, usize) {
    (word >> 2, (word & 3) as usize)
}

fn checksum(data: &DVector<f64>, version: u64, src_iter: usize) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325_u64;
    let mut eat = |x: u64| {
        for byte in x.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(version);
    eat(src_iter as u64);
    data.iter().for_each(|v| eat(v.to_bits()));
    h
}

/// A value taken from a mailbox.
#[derive(Debug, Clone)]
pub struct MailboxReading {
    pub data: DVector<f64>,
    pub version: u64,
    /// Writer-side iteration count that produced the value.
    pub src_iter: usize,
}

/// Creates a connected writer/reader pair over a fresh mailbox.
pub fn mailbox() -> (MailboxWriter, MailboxReader) {
    let shared = Arc::new(Shared {
        slots: [
            Mutex::new(Slot::default()),
            Mutex::new(Slot::default()),
            Mutex::new(Slot::default()),
        ],
        ready: AtomicU64::new(pack(0, 1)),
    });
    (
        MailboxWriter {
            shared: Arc::clone(&shared),
            back: 0,
            version: 0,
        },
        MailboxReader {
            shared,
            front: 2,
            front_version: 0,
            last_seen: 0,
        },
    )
}

#[derive(Debug)]
pub struct MailboxWriter {
    shared: Arc<Shared>,
    back: usize,
    version: u64,
}

impl MailboxWriter {
    /// Publishes a new value, overwriting any unread one.
    pub fn put(&mut self, data: &DVector<f64>, src_iter: usize) {
        let version = self.version + 1;
        {
            let mut slot = self.shared.slots[self.back]
                .try_lock()
                .expect("mailbox protocol violated: writer buffer contended");
            slot.data.clone_from(data);
            slot.version = version;
            slot.src_iter = src_iter;
            slot.checksum = checksum(data, version, src_iter);
        }
        let old = self
            .shared
            .ready
            .swap(pack(version, self.back), Ordering::AcqRel);
        self.back = unpack(old).1;
        self.version = version;
    }

    pub fn version(&self) -> u64 {
        self.version
    }
}

#[derive(Debug)]
pub struct MailboxReader {
    shared: Arc<Shared>,
    front: usize,
    front_version: u64,
    last_seen: u64,
}

impl MailboxReader {
    /// Version of the most recently published value.
    pub fn published_version(&self) -> u64 {
        unpack(self.shared.ready.load(Ordering::Acquire)).0
    }

    /// True when a value newer than the last read is available.
    pub fn has_news(&self) -> bool {
        self.published_version() > self.last_seen
    }

    pub fn last_seen(&self) -> u64 {
        self.last_seen
    }

    /// Takes the latest value if it is newer than the last read.
    pub fn read_latest(&mut self) -> Option<MailboxReading> {
        if !self.has_news() {
            return None;
        }
        // Hand the stale front buffer back and take whatever is newest.
        let got = self
            .shared
            .ready
            .swap(pack(self.front_version, self.front), Ordering::AcqRel);
        let (version, slot_idx) = unpack(got);
        debug_assert!(version > self.last_seen);
        self.front = slot_idx;
        self.front_version = version;
        self.last_seen = version;

        let slot = self.shared.slots[slot_idx]
            .try_lock()
            .expect("mailbox protocol violated: reader buffer contended");
        assert_eq!(
            slot.checksum,
            checksum(&slot.data, slot.version, slot.src_iter),
            "torn mailbox read detected"
        );
        assert_eq!(slot.version, version, "mailbox slot/version mismatch");
        Some(MailboxReading {
            data: slot.data.clone(),
            version,
            src_iter: slot.src_iter,
        })
    }
}
