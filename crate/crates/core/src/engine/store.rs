use smallvec::SmallVec;

use super::error::EngineError;
use super::key::{ArrayId, CompId, LocationKey, Round};

/// A committed value together with the computation that wrote it
/// (`None` for input locations).
#[derive(Clone, Debug, PartialEq)]
pub struct Cell<V> {
    pub value: V,
    pub writer: Option<CompId>,
}

#[derive(Clone, Debug)]
pub(crate) struct Entry<V> {
    pub(crate) cell: Option<Cell<V>>,
    pub(crate) readers: SmallVec<[CompId; 2]>,
}

impl<V> Default for Entry<V> {
    fn default() -> Self {
        Entry {
            cell: None,
            readers: SmallVec::new(),
        }
    }
}

impl<V> Entry<V> {
    fn is_vacant(&self) -> bool {
        self.cell.is_none() && self.readers.is_empty()
    }
}

/// Versioned write-once shared memory with reader subscriptions.
///
/// An entry may hold readers without a value: that happens between the purge
/// of an invalidated write and its rewrite during change propagation.
///
/// Entries are grouped by array, first index and round, so the cells of one
/// process sit together.
#[derive(Clone, Debug)]
pub struct CellStore<V> {
    columns: Vec<Vec<Column<V>>>,
}

/// Entries of one array and first index, indexed by round, each tagged with
/// its second index.
type Column<V> = Vec<SmallVec<[(u32, Entry<V>); 1]>>;

impl<V> Default for CellStore<V> {
    fn default() -> Self {
        CellStore {
            columns: Vec::new(),
        }
    }
}

fn grow<T>(v: &mut Vec<T>, len: usize, f: impl FnMut() -> T) {
    if v.len() < len {
        v.resize_with(len, f);
    }
}

impl<V: Clone + PartialEq> CellStore<V> {
    pub fn new() -> Self {
        Self::default()
    }

    fn entry(&self, key: &LocationKey) -> Option<&Entry<V>> {
        let group = self
            .columns
            .get(key.array.0 as usize)?
            .get(key.index[0] as usize)?
            .get(key.round as usize)?;
        group
            .iter()
            .find(|(j, _)| *j == key.index[1])
            .map(|(_, e)| e)
    }

    fn entry_mut(&mut self, key: &LocationKey) -> Option<&mut Entry<V>> {
        let group = self
            .columns
            .get_mut(key.array.0 as usize)?
            .get_mut(key.index[0] as usize)?
            .get_mut(key.round as usize)?;
        group
            .iter_mut()
            .find(|(j, _)| *j == key.index[1])
            .map(|(_, e)| e)
    }

    fn entry_or_default(&mut self, key: LocationKey) -> &mut Entry<V> {
        let (a, i, r) = (
            key.array.0 as usize,
            key.index[0] as usize,
            key.round as usize,
        );
        grow(&mut self.columns, a + 1, Vec::new);
        let arr = &mut self.columns[a];
        grow(arr, i + 1, Vec::new);
        let col = &mut arr[i];
        grow(col, r + 1, SmallVec::new);
        let group = &mut col[r];
        let pos = match group.iter().position(|(j, _)| *j == key.index[1]) {
            Some(p) => p,
            None => {
                group.push((key.index[1], Entry::default()));
                group.len() - 1
            }
        };
        &mut group[pos].1
    }

    /// Drops the entry for `key` if it holds neither a value nor readers.
    fn prune(&mut self, key: &LocationKey) {
        let Some(col) = self
            .columns
            .get_mut(key.array.0 as usize)
            .and_then(|a| a.get_mut(key.index[0] as usize))
        else {
            return;
        };
        if let Some(group) = col.get_mut(key.round as usize) {
            group.retain(|(j, e)| *j != key.index[1] || !e.is_vacant());
        }
        while col.last().is_some_and(|g| g.is_empty()) {
            col.pop();
        }
    }

    fn entries(&self) -> impl Iterator<Item = (LocationKey, &Entry<V>)> {
        self.columns.iter().enumerate().flat_map(|(a, arr)| {
            arr.iter().enumerate().flat_map(move |(i, col)| {
                col.iter().enumerate().flat_map(move |(r, group)| {
                    group.iter().map(move |(j, e)| {
                        (
                            LocationKey::new(ArrayId(a as u8), r as Round, i as u32, *j),
                            e,
                        )
                    })
                })
            })
        })
    }

    pub fn get(&self, key: &LocationKey) -> Option<&V> {
        self.cell(key).map(|c| &c.value)
    }

    pub fn cell(&self, key: &LocationKey) -> Option<&Cell<V>> {
        self.entry(key).and_then(|e| e.cell.as_ref())
    }

    /// Computations currently subscribed to `key`.
    pub fn readers(&self, key: &LocationKey) -> &[CompId] {
        self.entry(key).map(|e| &e.readers[..]).unwrap_or(&[])
    }

    pub fn contains(&self, key: &LocationKey) -> bool {
        self.cell(key).is_some()
    }

    /// Installs or replaces an input value. Returns whether the stored value
    /// changed, so callers can build the changed set with value-diff
    /// suppression.
    pub fn set_input(&mut self, key: LocationKey, value: V) -> Result<bool, EngineError> {
        let entry = self.entry_or_default(key);
        match &mut entry.cell {
            Some(Cell {
                writer: Some(w), ..
            }) => Err(EngineError::NotAnInput { key, writer: *w }),
            Some(cell) => {
                if cell.value == value {
                    Ok(false)
                } else {
                    cell.value = value;
                    Ok(true)
                }
            }
            None => {
                entry.cell = Some(Cell {
                    value,
                    writer: None,
                });
                Ok(true)
            }
        }
    }

    /// Removes an input value. Returns whether one was present.
    pub fn remove_input(&mut self, key: &LocationKey) -> Result<bool, EngineError> {
        let Some(entry) = self.entry_mut(key) else {
            return Ok(false);
        };
        match &entry.cell {
            Some(Cell {
                writer: Some(w), ..
            }) => Err(EngineError::NotAnInput {
                key: *key,
                writer: *w,
            }),
            Some(_) => {
                entry.cell = None;
                self.prune(key);
                Ok(true)
            }
            None => Ok(false),
        }
    }

    /// Number of locations holding a value.
    pub fn len(&self) -> usize {
        self.entries().filter(|(_, e)| e.cell.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Iterates over every location holding a value.
    pub fn cells(&self) -> impl Iterator<Item = (LocationKey, &Cell<V>)> {
        self.entries()
            .filter_map(|(k, e)| e.cell.as_ref().map(|c| (k, c)))
    }

    pub(crate) fn subscriptions(&self) -> impl Iterator<Item = (LocationKey, &[CompId])> {
        self.entries().map(|(k, e)| (k, &e.readers[..]))
    }

    pub(crate) fn has_entry(&self, key: &LocationKey) -> bool {
        self.entry(key).is_some()
    }

    pub(crate) fn commit_write(
        &mut self,
        key: LocationKey,
        value: V,
        writer: CompId,
    ) -> Result<(), EngineError> {
        let entry = self.entry_or_default(key);
        if let Some(existing) = &entry.cell {
            let existing = match existing.writer {
                Some(w) => w.to_string(),
                None => "input".to_string(),
            };
            return Err(EngineError::WriteConflict {
                key,
                existing,
                writer,
            });
        }
        entry.cell = Some(Cell {
            value,
            writer: Some(writer),
        });
        Ok(())
    }

    pub(crate) fn subscribe(&mut self, key: LocationKey, reader: CompId) {
        let entry = self.entry_or_default(key);
        if !entry.readers.contains(&reader) {
            entry.readers.push(reader);
        }
    }

    pub(crate) fn unsubscribe(&mut self, key: &LocationKey, reader: CompId) {
        if let Some(entry) = self.entry_mut(key) {
            entry.readers.retain(|r| *r != reader);
            if entry.is_vacant() {
                self.prune(key);
            }
        }
    }

    /// Removes a computation's write, returning the old value.
    pub(crate) fn purge_write(&mut self, key: &LocationKey, writer: CompId) -> Option<V> {
        let entry = self.entry_mut(key)?;
        match &entry.cell {
            Some(c) if c.writer == Some(writer) => {}
            _ => return None,
        }
        let cell = entry.cell.take();
        if entry.is_vacant() {
            self.prune(key);
        }
        cell.map(|c| c.value)
    }

    /// Drops every computed value and subscription, keeping inputs.
    pub(crate) fn clear_computed(&mut self) {
        for col in self.columns.iter_mut().flatten() {
            for group in col.iter_mut() {
                group.retain(|(_, e)| {
                    e.readers.clear();
                    matches!(e.cell, Some(Cell { writer: None, .. }))
                });
            }
            while col.last().is_some_and(|g| g.is_empty()) {
                col.pop();
            }
        }
    }
}
