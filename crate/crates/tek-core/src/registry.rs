// SPDX-License-Identifier: Apache-2.0

//! Thread Information Table: fixed 40-byte records keyed by tid, a role
//! index for reverse lookup, and the periodic monitor refresh.
//!
//! # Record layout
//!
//! Each record serializes to exactly 40 bytes, little-endian, in this
//! order:
//!
//! | offset | size | field              | type                          |
//! |-------:|-----:|--------------------|-------------------------------|
//! |      0 |    4 | tid                | u32                           |
//! |      4 |    1 | policy             | u8 (0 normal, 1 tek)          |
//! |      5 |    1 | priority           | i8 nice                       |
//! |      6 |    1 | criticality        | u8 (0 non-critical, 1 critical)|
//! |      7 |    1 | zone               | u8 (0 unknown, 1 low, 2 normal, 3 high) |
//! |      8 |    8 | creation_time_ns   | u64                           |
//! |     16 |    4 | stack_reserved_kib | u32                           |
//! |     20 |    4 | vm_kib             | u32                           |
//! |     24 |    4 | peak_stack_kib     | u32                           |
//! |     28 |   12 | role               | zero-padded UTF-8             |
//!
//! Roles longer than 12 bytes are truncated at a character boundary, so
//! the stored form is always valid UTF-8. A table file (`.tit`) is an
//! 8-byte little-endian record count followed by the records in tid
//! order.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::error::RegistryError;
use crate::types::{Criticality, Policy, Tid, Zone};

/// Serialized size of one record.
pub const RECORD_BYTES: usize = 40;
/// Bytes reserved for the role name.
pub const ROLE_BYTES: usize = 12;
/// Ticks between monitor refreshes unless configured otherwise.
pub const DEFAULT_MONITOR_PERIOD: u64 = 100;

/// Truncates a role to at most [`ROLE_BYTES`] bytes on a character
/// boundary.
pub fn truncate_role(role: &str) -> &str {
    if role.len() <= ROLE_BYTES {
        return role;
    }
    let mut end = ROLE_BYTES;
    while !role.is_char_boundary(end) {
        end -= 1;
    }
    &role[..end]
}

/// One thread's fixed-layout attribute record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreadInfoRecord {
    pub tid: Tid,
    pub policy: Policy,
    pub priority: i8,
    pub criticality: Criticality,
    pub zone: Zone,
    pub creation_time_ns: u64,
    pub stack_reserved_kib: u32,
    pub vm_kib: u32,
    pub peak_stack_kib: u32,
    /// Stored truncated; always at most [`ROLE_BYTES`] bytes.
    pub role: String,
}

impl ThreadInfoRecord {
    pub fn to_bytes(&self) -> [u8; RECORD_BYTES] {
        let mut buf = [0u8; RECORD_BYTES];
        buf[0..4].copy_from_slice(&self.tid.0.to_le_bytes());
        buf[4] = self.policy.as_u8();
        buf[5] = self.priority as u8;
        buf[6] = self.criticality.as_u8();
        buf[7] = self.zone.as_u8();
        buf[8..16].copy_from_slice(&self.creation_time_ns.to_le_bytes());
        buf[16..20].copy_from_slice(&self.stack_reserved_kib.to_le_bytes());
        buf[20..24].copy_from_slice(&self.vm_kib.to_le_bytes());
        buf[24..28].copy_from_slice(&self.peak_stack_kib.to_le_bytes());
        let role = truncate_role(&self.role).as_bytes();
        buf[28..28 + role.len()].copy_from_slice(role);
        buf
    }

    pub fn from_bytes(buf: &[u8]) -> Result<ThreadInfoRecord, RegistryError> {
        if buf.len() < RECORD_BYTES {
            return Err(RegistryError::Truncated { need: RECORD_BYTES, have: buf.len() });
        }
        let policy = Policy::from_u8(buf[4])
            .ok_or(RegistryError::BadField { field: "policy", value: buf[4] })?;
        let criticality = Criticality::from_u8(buf[6])
            .ok_or(RegistryError::BadField { field: "criticality", value: buf[6] })?;
        let zone = Zone::from_u8(buf[7])
            .ok_or(RegistryError::BadField { field: "zone", value: buf[7] })?;
        let role_raw = &buf[28..RECORD_BYTES];
        let role_end = role_raw.iter().rposition(|b| *b != 0).map_or(0, |p| p + 1);
        let role = std::str::from_utf8(&role_raw[..role_end])
            .map_err(|e| RegistryError::BadField {
                field: "role",
                value: role_raw[e.valid_up_to()],
            })?
            .to_string();
        Ok(ThreadInfoRecord {
            tid: Tid(u32::from_le_bytes(buf[0..4].try_into().expect("4 bytes"))),
            policy,
            priority: buf[5] as i8,
            criticality,
            zone,
            creation_time_ns: u64::from_le_bytes(buf[8..16].try_into().expect("8 bytes")),
            stack_reserved_kib: u32::from_le_bytes(buf[16..20].try_into().expect("4 bytes")),
            vm_kib: u32::from_le_bytes(buf[20..24].try_into().expect("4 bytes")),
            peak_stack_kib: u32::from_le_bytes(buf[24..28].try_into().expect("4 bytes")),
            role,
        })
    }
}

/// Attributes supplied at registration.
#[derive(Debug, Clone)]
pub struct RegisterAttrs {
    pub policy: Policy,
    pub priority: i8,
    pub criticality: Criticality,
    pub role: String,
    pub stack_reserved_kib: u32,
    pub vm_kib: u32,
}

/// Partial update; `None` fields are untouched.
#[derive(Debug, Clone, Default)]
pub struct AttrUpdate {
    pub role: Option<String>,
    pub criticality: Option<Criticality>,
    pub policy: Option<Policy>,
    pub priority: Option<i8>,
}

/// Scheduling changes the caller must forward to the scheduler.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SchedForward {
    pub policy: Option<Policy>,
    pub nice: Option<i8>,
}

/// Per-thread snapshot the monitor reads from scheduler and stack state.
#[derive(Debug, Clone, Copy)]
pub struct MonitorSource {
    pub tid: Tid,
    pub policy: Policy,
    pub priority: i8,
    pub stack_reserved_kib: u32,
    pub vm_kib: u32,
    pub peak_stack_kib: u32,
    pub zone: Zone,
}

/// The table proper. Records are hash-indexed for constant-time access;
/// exports sort by tid.
#[derive(Debug, Clone, Default)]
pub struct ThreadInformationTable {
    records: HashMap<Tid, ThreadInfoRecord>,
    role_index: BTreeMap<String, BTreeSet<Tid>>,
    criticality_written: HashSet<Tid>,
}

impl ThreadInformationTable {
    pub fn new() -> ThreadInformationTable {
        ThreadInformationTable::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn register_thread(
        &mut self,
        tid: Tid,
        attrs: RegisterAttrs,
        now_ns: u64,
    ) -> Result<&ThreadInfoRecord, RegistryError> {
        if self.records.contains_key(&tid) {
            return Err(RegistryError::ThreadExists(tid));
        }
        let role = truncate_role(&attrs.role).to_string();
        self.role_index.entry(role.clone()).or_default().insert(tid);
        let record = ThreadInfoRecord {
            tid,
            policy: attrs.policy,
            priority: attrs.priority,
            criticality: attrs.criticality,
            zone: Zone::Unknown,
            creation_time_ns: now_ns,
            stack_reserved_kib: attrs.stack_reserved_kib,
            vm_kib: attrs.vm_kib,
            peak_stack_kib: 0,
            role,
        };
        Ok(self.records.entry(tid).or_insert(record))
    }

    /// Applies a partial update. Criticality is write-once through this
    /// API; policy and priority changes are returned for forwarding to
    /// the scheduler.
    pub fn set_attributes(
        &mut self,
        tid: Tid,
        update: AttrUpdate,
    ) -> Result<SchedForward, RegistryError> {
        if !self.records.contains_key(&tid) {
            return Err(RegistryError::NoSuchThread(tid));
        }
        if update.criticality.is_some() && self.criticality_written.contains(&tid) {
            return Err(RegistryError::CriticalityImmutable(tid));
        }
        let mut forward = SchedForward::default();
        if let Some(role) = update.role {
            let new_role = truncate_role(&role).to_string();
            let record = self.records.get_mut(&tid).expect("checked above");
            let old_role = std::mem::replace(&mut record.role, new_role.clone());
            let stale = {
                let set = self.role_index.get_mut(&old_role).expect("indexed");
                set.remove(&tid);
                set.is_empty()
            };
            if stale {
                self.role_index.remove(&old_role);
            }
            self.role_index.entry(new_role).or_default().insert(tid);
        }
        let record = self.records.get_mut(&tid).expect("checked above");
        if let Some(criticality) = update.criticality {
            record.criticality = criticality;
            self.criticality_written.insert(tid);
        }
        if let Some(policy) = update.policy {
            record.policy = policy;
            forward.policy = Some(policy);
        }
        if let Some(priority) = update.priority {
            record.priority = priority;
            forward.nice = Some(priority);
        }
        Ok(forward)
    }

    /// Full record snapshot; reads never mutate.
    pub fn get_attributes(&self, tid: Tid) -> Result<ThreadInfoRecord, RegistryError> {
        self.records.get(&tid).cloned().ok_or(RegistryError::NoSuchThread(tid))
    }

    /// All tids registered under a role, in tid order. The query is
    /// truncated the same way stored roles are.
    pub fn lookup_by_role(&self, role: &str) -> Vec<Tid> {
        self.role_index
            .get(truncate_role(role))
            .map(|set| set.iter().copied().collect())
            .unwrap_or_default()
    }

    /// Refreshes the record of every listed live thread and returns how
    /// many records were touched. Threads absent from `sources`
    /// (terminated ones) keep their final values.
    pub fn monitor_sample(&mut self, sources: &[MonitorSource]) -> usize {
        let mut touched = 0;
        for src in sources {
            if let Some(record) = self.records.get_mut(&src.tid) {
                record.policy = src.policy;
                record.priority = src.priority;
                record.stack_reserved_kib = src.stack_reserved_kib;
                record.vm_kib = src.vm_kib;
                record.peak_stack_kib = src.peak_stack_kib;
                record.zone = src.zone;
                touched += 1;
            }
        }
        touched
    }

    /// Records sorted by tid.
    pub fn records_sorted(&self) -> Vec<&ThreadInfoRecord> {
        let mut tids: Vec<Tid> = self.records.keys().copied().collect();
        tids.sort();
        tids.iter().map(|t| &self.records[t]).collect()
    }

    /// Binary table image: 8-byte little-endian record count, then the
    /// records in tid order.
    pub fn encode_table(&self) -> Vec<u8> {
        let records = self.records_sorted();
        let mut out = Vec::with_capacity(8 + records.len() * RECORD_BYTES);
        out.extend_from_slice(&(records.len() as u64).to_le_bytes());
        for record in records {
            out.extend_from_slice(&record.to_bytes());
        }
        out
    }

    /// True when the role index matches one rebuilt from the records.
    pub fn role_index_consistent(&self) -> bool {
        let mut rebuilt: BTreeMap<String, BTreeSet<Tid>> = BTreeMap::new();
        for (tid, record) in &self.records {
            rebuilt.entry(record.role.clone()).or_default().insert(*tid);
        }
        rebuilt == self.role_index
    }
}

/// Decodes a binary table image produced by
/// [`ThreadInformationTable::encode_table`].
pub fn decode_table(bytes: &[u8]) -> Result<Vec<ThreadInfoRecord>, RegistryError> {
    if bytes.len() < 8 {
        return Err(RegistryError::Truncated { need: 8, have: bytes.len() });
    }
    let count = u64::from_le_bytes(bytes[0..8].try_into().expect("8 bytes")) as usize;
    let need = 8 + count * RECORD_BYTES;
    if bytes.len() < need {
        return Err(RegistryError::Truncated { need, have: bytes.len() });
    }
    let mut records = Vec::with_capacity(count);
    for i in 0..count {
        let start = 8 + i * RECORD_BYTES;
        records.push(ThreadInfoRecord::from_bytes(&bytes[start..start + RECORD_BYTES])?);
    }
    Ok(records)
}
