//! Relational physical model: one table per entity, binary rows in a vector
//! of fixed-size pages, a primary-key index per table.
//!
//! Row layout (little-endian):
//!
//! ```text
//! row      := header column*  padding
//! header   := ncols:u16 flags:u16 reserved:u32 present:u64 reserved:u64   (24 bytes)
//! column   := text | list | int
//! text     := len:u32 utf8[len]
//! list     := count:u32 text[count]
//! int      := i64
//! padding  := zero bytes up to a multiple of 8
//! ```
//!
//! Bit `i` of `present` is set when column `i` is stored; absent columns
//! take no space. Columns follow [`entity_fields`] order. Each stored row
//! also costs a 4-byte line pointer (its length prefix in the table file).
//!
//! A table file `<entity>.tbl` is the concatenation of `len:u32 row` items in
//! primary-key order, zero-padded to a multiple of [`PAGE_SIZE`]; a zero
//! length ends the row stream. Rows may straddle page boundaries. The data
//! component of an entity is therefore
//! `ceil(sum(4 + row_len) / PAGE_SIZE) * PAGE_SIZE`.
//!
//! The index file `<entity>.idx` holds one [`INDEX_METAPAGE_BYTES`] metapage
//! followed by `key_len:u32 key row_offset:u64 row_len:u32` per row, i.e.
//! `key bytes + INDEX_ENTRY_OVERHEAD` per record.

use std::collections::BTreeMap;
use std::path::Path;

use crate::vault::key::{BusinessKey, LinkId, SourceRef};
use crate::vault::record::{HubRecord, LinkRecord, Record, RecordId, SatelliteRecord};
use crate::vault::schema::{EntityKind, VaultSchema};
use crate::vault::value::{AttrKind, AttributeValue, Timestamp};

use super::filter::{entity_fields, EntityFilter, Matcher, DATETIME_FIELD, SOURCE_FIELD};
use super::integrity::{check_put, RecordLookup};
use super::report::{EntityStorage, StorageReport};
use super::{check_schema_change, clear_data_files, read_schema, write_schema, Backend, BackendKind, StorageError};

pub const PAGE_SIZE: u64 = 8192;
pub const ROW_HEADER_BYTES: usize = 24;
pub const LINE_POINTER_BYTES: u64 = 4;
pub const INDEX_METAPAGE_BYTES: u64 = 8192;
pub const INDEX_ENTRY_OVERHEAD: u64 = 16;
const MAX_COLUMNS: usize = 64;
const INDEX_MAGIC: &[u8; 8] = b"MVIDX001";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ColumnType {
    Text,
    TextList,
    /// Instants as epoch milliseconds.
    Timestamp,
    /// Link surrogate ids, exposed to filters as decimal text.
    LinkId,
}

#[derive(Clone, Debug)]
struct Column {
    name: String,
    ty: ColumnType,
}

#[derive(Debug, PartialEq)]
enum Cell {
    Text(String),
    List(Vec<String>),
    Int(i64),
}

#[derive(Clone, Debug)]
struct Table {
    kind: EntityKind,
    columns: Vec<Column>,
    /// Member hubs of a link table, in column order.
    members: Vec<String>,
    /// Encoded primary key → encoded row.
    rows: BTreeMap<Vec<u8>, Vec<u8>>,
}

/// Row decoding failure; only reachable for bytes read from disk.
#[derive(Debug)]
struct RowError(String);

impl Table {
    fn for_entity(schema: &VaultSchema, entity: &str) -> Result<Self, StorageError> {
        let def = schema.entity(entity).ok_or_else(|| StorageError::UnknownEntity(entity.to_owned()))?;
        let kind = def.kind();
        let columns: Vec<Column> = entity_fields(schema, entity)?
            .into_iter()
            .enumerate()
            .map(|(i, (name, attr_kind))| {
                let ty = if i == 0 && kind == EntityKind::Link {
                    ColumnType::LinkId
                } else {
                    match attr_kind {
                        AttrKind::Text => ColumnType::Text,
                        AttrKind::TextList => ColumnType::TextList,
                        AttrKind::Timestamp => ColumnType::Timestamp,
                    }
                };
                Column { name, ty }
            })
            .collect();
        if columns.len() > MAX_COLUMNS {
            return Err(StorageError::Integrity {
                entity: entity.to_owned(),
                message: format!("{} columns exceed the {MAX_COLUMNS}-column row format", columns.len()),
            });
        }
        let members = schema.link(entity).map(|l| l.members.clone()).unwrap_or_default();
        Ok(Table { kind, columns, members, rows: BTreeMap::new() })
    }

    fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    fn data_bytes(&self) -> u64 {
        let raw: u64 = self.rows.values().map(|r| LINE_POINTER_BYTES + r.len() as u64).sum();
        raw.div_ceil(PAGE_SIZE) * PAGE_SIZE
    }

    fn index_bytes(&self) -> u64 {
        INDEX_METAPAGE_BYTES + self.rows.keys().map(|k| k.len() as u64 + INDEX_ENTRY_OVERHEAD).sum::<u64>()
    }
}

fn hub_pk(key: &BusinessKey) -> Vec<u8> {
    key.as_str().as_bytes().to_vec()
}

fn link_pk(id: LinkId) -> Vec<u8> {
    id.0.to_be_bytes().to_vec()
}

fn sat_prefix(parent: &BusinessKey) -> Vec<u8> {
    let mut pk = parent.as_str().as_bytes().to_vec();
    pk.push(0);
    pk
}

fn sat_pk(parent: &BusinessKey, at: Timestamp) -> Vec<u8> {
    let mut pk = sat_prefix(parent);
    pk.extend_from_slice(&((at.as_millis() as u64) ^ (1 << 63)).to_be_bytes());
    pk
}

fn pk_datetime(pk: &[u8]) -> Timestamp {
    let tail: [u8; 8] = pk[pk.len() - 8..].try_into().expect("satellite keys end with 8 bytes");
    Timestamp::from_millis((u64::from_be_bytes(tail) ^ (1 << 63)) as i64)
}

fn encode_row(cells: &[Option<Cell>]) -> Vec<u8> {
    let mut present = 0u64;
    for (i, c) in cells.iter().enumerate() {
        if c.is_some() {
            present |= 1 << i;
        }
    }
    let mut row = Vec::with_capacity(64);
    row.extend_from_slice(&(cells.len() as u16).to_le_bytes());
    row.extend_from_slice(&0u16.to_le_bytes());
    row.extend_from_slice(&0u32.to_le_bytes());
    row.extend_from_slice(&present.to_le_bytes());
    row.extend_from_slice(&0u64.to_le_bytes());
    debug_assert_eq!(row.len(), ROW_HEADER_BYTES);
    let put_text = |row: &mut Vec<u8>, t: &str| {
        row.extend_from_slice(&(t.len() as u32).to_le_bytes());
        row.extend_from_slice(t.as_bytes());
    };
    for cell in cells.iter().flatten() {
        match cell {
            Cell::Text(t) => put_text(&mut row, t),
            Cell::List(items) => {
                row.extend_from_slice(&(items.len() as u32).to_le_bytes());
                for t in items {
                    put_text(&mut row, t);
                }
            }
            Cell::Int(v) => row.extend_from_slice(&v.to_le_bytes()),
        }
    }
    while row.len() % 8 != 0 {
        row.push(0);
    }
    row
}

struct RowReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> RowReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], RowError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| RowError("truncated row".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, RowError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn i64(&mut self) -> Result<i64, RowError> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn text(&mut self) -> Result<&'a str, RowError> {
        let len = self.u32()? as usize;
        std::str::from_utf8(self.take(len)?).map_err(|_| RowError("invalid utf-8".into()))
    }

    fn skip(&mut self, ty: ColumnType) -> Result<(), RowError> {
        match ty {
            ColumnType::Text => {
                let len = self.u32()? as usize;
                self.take(len)?;
            }
            ColumnType::TextList => {
                for _ in 0..self.u32()? {
                    let len = self.u32()? as usize;
                    self.take(len)?;
                }
            }
            ColumnType::Timestamp | ColumnType::LinkId => {
                self.take(8)?;
            }
        }
        Ok(())
    }

    fn cell(&mut self, ty: ColumnType) -> Result<Cell, RowError> {
        Ok(match ty {
            ColumnType::Text => Cell::Text(self.text()?.to_owned()),
            ColumnType::TextList => {
                let n = self.u32()?;
                let mut items = Vec::with_capacity(n as usize);
                for _ in 0..n {
                    items.push(self.text()?.to_owned());
                }
                Cell::List(items)
            }
            ColumnType::Timestamp | ColumnType::LinkId => Cell::Int(self.i64()?),
        })
    }
}

fn row_header(bytes: &[u8], ncols: usize) -> Result<u64, RowError> {
    if bytes.len() < ROW_HEADER_BYTES {
        return Err(RowError("row shorter than header".into()));
    }
    let stored = u16::from_le_bytes([bytes[0], bytes[1]]) as usize;
    if stored != ncols {
        return Err(RowError(format!("row has {stored} columns, table has {ncols}")));
    }
    Ok(u64::from_le_bytes(bytes[8..16].try_into().unwrap()))
}

/// Decodes column `idx` only, skipping the ones before it.
#[cfg(test)]
fn read_cell(table: &Table, row: &[u8], idx: usize) -> Result<Option<Cell>, RowError> {
    let present = row_header(row, table.columns.len())?;
    if present & (1 << idx) == 0 {
        return Ok(None);
    }
    let mut reader = RowReader { bytes: row, pos: ROW_HEADER_BYTES };
    for (i, col) in table.columns.iter().enumerate().take(idx) {
        if present & (1 << i) != 0 {
            reader.skip(col.ty)?;
        }
    }
    reader.cell(table.columns[idx].ty).map(Some)
}

/// Evaluates `matcher` on column `idx` straight from the row bytes.
fn cell_matches(table: &Table, row: &[u8], idx: usize, matcher: &Matcher) -> Result<bool, RowError> {
    let present = row_header(row, table.columns.len())?;
    if present & (1 << idx) == 0 {
        return Ok(false);
    }
    let mut reader = RowReader { bytes: row, pos: ROW_HEADER_BYTES };
    for (i, col) in table.columns.iter().enumerate().take(idx) {
        if present & (1 << i) != 0 {
            reader.skip(col.ty)?;
        }
    }
    Ok(match table.columns[idx].ty {
        ColumnType::Text => matcher.text(reader.text()?),
        ColumnType::TextList => {
            let mut any = false;
            for _ in 0..reader.u32()? {
                any |= matcher.text(reader.text()?);
            }
            any
        }
        ColumnType::Timestamp => matcher.instant(Timestamp::from_millis(reader.i64()?)),
        ColumnType::LinkId => matcher.text(&reader.i64()?.to_string()),
    })
}

fn decode_cells(table: &Table, row: &[u8]) -> Result<Vec<Option<Cell>>, RowError> {
    let present = row_header(row, table.columns.len())?;
    let mut reader = RowReader { bytes: row, pos: ROW_HEADER_BYTES };
    table
        .columns
        .iter()
        .enumerate()
        .map(|(i, col)| if present & (1 << i) != 0 { reader.cell(col.ty).map(Some) } else { Ok(None) })
        .collect()
}

fn cell_value(ty: ColumnType, cell: Cell) -> AttributeValue {
    match (ty, cell) {
        (ColumnType::LinkId, Cell::Int(v)) => AttributeValue::Text(v.to_string()),
        (ColumnType::Timestamp, Cell::Int(v)) => AttributeValue::Timestamp(Timestamp::from_millis(v)),
        (_, Cell::Text(t)) => AttributeValue::Text(t),
        (_, Cell::List(items)) => AttributeValue::text_list(items),
        (_, Cell::Int(v)) => AttributeValue::Text(v.to_string()),
    }
}

fn value_cell(value: &AttributeValue) -> Option<Cell> {
    match value {
        AttributeValue::Text(t) => Some(Cell::Text(t.clone())),
        AttributeValue::TextList(v) => Some(Cell::List(v.clone())),
        AttributeValue::Timestamp(ts) => Some(Cell::Int(ts.as_millis())),
        AttributeValue::Absent => None,
    }
}

#[derive(Debug, Default)]
pub struct RelationalBackend {
    schema: Option<VaultSchema>,
    tables: BTreeMap<String, Table>,
}

impl RelationalBackend {
    pub fn new() -> Self {
        RelationalBackend::default()
    }

    pub fn open(dir: &Path) -> Result<Self, StorageError> {
        let schema = read_schema(dir)?;
        let mut backend = RelationalBackend::new();
        backend.init_schema(&schema)?;
        for (entity, table) in backend.tables.iter_mut() {
            let path = dir.join(format!("{entity}.tbl"));
            let bytes = match std::fs::read(&path) {
                Ok(bytes) => bytes,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => continue,
                Err(e) => return Err(StorageError::io(&path, e)),
            };
            let corrupt = |message: String| StorageError::Corrupt { path: path.clone(), message };
            if !(bytes.len() as u64).is_multiple_of(PAGE_SIZE) {
                return Err(corrupt(format!("{} bytes is not a whole number of pages", bytes.len())));
            }
            let mut pos = 0usize;
            while pos + 4 <= bytes.len() {
                let len = u32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap()) as usize;
                if len == 0 {
                    break;
                }
                let row = bytes.get(pos + 4..pos + 4 + len).ok_or_else(|| corrupt("row past end of file".into()))?;
                let record = decode_record(entity, table, row).map_err(|e| corrupt(e.0))?;
                let pk = primary_key(&record);
                table.rows.insert(pk, row.to_vec());
                pos += 4 + len;
            }
        }
        Ok(backend)
    }

    fn table(&self, entity: &str) -> Result<&Table, StorageError> {
        if self.schema.is_none() {
            return Err(StorageError::NotInitialized);
        }
        self.tables.get(entity).ok_or_else(|| StorageError::UnknownEntity(entity.to_owned()))
    }

    fn schema_ref(&self) -> Result<&VaultSchema, StorageError> {
        self.schema.as_ref().ok_or(StorageError::NotInitialized)
    }

    fn decode(&self, entity: &str, table: &Table, row: &[u8]) -> Result<Record, StorageError> {
        decode_record(entity, table, row)
            .map_err(|e| StorageError::Corrupt { path: format!("{entity}.tbl").into(), message: e.0 })
    }
}

fn primary_key(record: &Record) -> Vec<u8> {
    match record {
        Record::Hub(h) => hub_pk(&h.key),
        Record::Link(l) => link_pk(l.id),
        Record::Satellite(s) => sat_pk(&s.parent_key, s.datetime),
    }
}

fn text_cell(cell: Option<Cell>, what: &str) -> Result<String, RowError> {
    match cell {
        Some(Cell::Text(t)) => Ok(t),
        _ => Err(RowError(format!("missing {what}"))),
    }
}

fn int_cell(cell: Option<Cell>, what: &str) -> Result<i64, RowError> {
    match cell {
        Some(Cell::Int(v)) => Ok(v),
        _ => Err(RowError(format!("missing {what}"))),
    }
}

fn source_of(text: String) -> Result<SourceRef, RowError> {
    SourceRef::new(text).map_err(|e| RowError(e.to_string()))
}

fn decode_record(entity: &str, table: &Table, row: &[u8]) -> Result<Record, RowError> {
    let mut cells = decode_cells(table, row)?;
    let n = cells.len();
    let source = source_of(text_cell(cells[n - 1].take(), SOURCE_FIELD)?)?;
    let datetime = Timestamp::from_millis(int_cell(cells[n - 2].take(), DATETIME_FIELD)?);
    let mut cells = cells.into_iter().take(n - 2);
    let first = cells.next().flatten();
    Ok(match table.kind {
        EntityKind::Hub => Record::Hub(HubRecord {
            hub: entity.to_owned(),
            key: BusinessKey::from_raw(text_cell(first, "key")?),
            natural: text_cell(cells.next().flatten(), "natural value")?,
            datetime,
            source,
        }),
        EntityKind::Link => {
            let id = LinkId(int_cell(first, "link id")? as u64);
            let members = table
                .members
                .iter()
                .zip(cells)
                .map(|(hub, cell)| text_cell(cell, hub).map(|k| (hub.clone(), BusinessKey::from_raw(k))))
                .collect::<Result<_, _>>()?;
            Record::Link(LinkRecord { link: entity.to_owned(), id, members, datetime, source })
        }
        EntityKind::Satellite => {
            let parent_key = BusinessKey::from_raw(text_cell(first, "parent key")?);
            let attributes = table.columns[1..n - 2]
                .iter()
                .zip(cells)
                .filter_map(|(col, cell)| cell.map(|c| (col.name.clone(), cell_value(col.ty, c))))
                .collect();
            Record::Satellite(SatelliteRecord { satellite: entity.to_owned(), parent_key, datetime, attributes, source })
        }
    })
}

fn encode_record(table: &Table, record: &Record) -> Vec<u8> {
    let mut cells: Vec<Option<Cell>> = Vec::with_capacity(table.columns.len());
    match record {
        Record::Hub(h) => {
            cells.push(Some(Cell::Text(h.key.to_string())));
            cells.push(Some(Cell::Text(h.natural.clone())));
        }
        Record::Link(l) => {
            cells.push(Some(Cell::Int(l.id.0 as i64)));
            cells.extend(table.members.iter().map(|m| l.members.get(m).map(|k| Cell::Text(k.to_string()))));
        }
        Record::Satellite(s) => {
            cells.push(Some(Cell::Text(s.parent_key.to_string())));
            for col in &table.columns[1..table.columns.len() - 2] {
                cells.push(s.attributes.get(&col.name).and_then(value_cell));
            }
        }
    }
    cells.push(Some(Cell::Int(record.datetime().as_millis())));
    cells.push(Some(Cell::Text(record.source().to_string())));
    encode_row(&cells)
}

impl RecordLookup for RelationalBackend {
    fn has_hub(&self, hub: &str, key: &BusinessKey) -> bool {
        self.tables.get(hub).is_some_and(|t| t.rows.contains_key(&hub_pk(key)))
    }

    fn has_link(&self, link: &str, id: LinkId) -> bool {
        self.tables.get(link).is_some_and(|t| t.rows.contains_key(&link_pk(id)))
    }

    fn latest_version(&self, satellite: &str, parent: &BusinessKey) -> Option<Timestamp> {
        let table = self.tables.get(satellite)?;
        let prefix = sat_prefix(parent);
        table
            .rows
            .range(prefix.clone()..)
            .take_while(|(k, _)| k.starts_with(&prefix) && k.len() == prefix.len() + 8)
            .last()
            .map(|(k, _)| pk_datetime(k))
    }
}

impl Backend for RelationalBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Relational
    }

    fn schema(&self) -> Option<&VaultSchema> {
        self.schema.as_ref()
    }

    fn init_schema(&mut self, schema: &VaultSchema) -> Result<(), StorageError> {
        check_schema_change(self.schema.as_ref(), schema)?;
        for entity in schema.entity_names() {
            if !self.tables.contains_key(entity) {
                self.tables.insert(entity.to_owned(), Table::for_entity(schema, entity)?);
            }
        }
        self.schema = Some(schema.clone());
        Ok(())
    }

    fn put_record(&mut self, record: Record) -> Result<(), StorageError> {
        let schema = self.schema_ref()?;
        check_put(schema, self, &record)?;
        let table = self.table(record.entity())?;
        let row = encode_record(table, &record);
        let pk = primary_key(&record);
        self.tables.get_mut(record.entity()).expect("checked above").rows.insert(pk, row);
        Ok(())
    }

    fn get_by_key(&self, entity: &str, id: &RecordId) -> Result<Option<Record>, StorageError> {
        let table = self.table(entity)?;
        let pk = match (table.kind, id) {
            (EntityKind::Hub, RecordId::Hub(k)) => hub_pk(k),
            (EntityKind::Link, RecordId::Link(l)) => link_pk(*l),
            (EntityKind::Satellite, RecordId::Satellite(p, at)) => sat_pk(p, *at),
            _ => return Ok(None),
        };
        table.rows.get(&pk).map(|row| self.decode(entity, table, row)).transpose()
    }

    fn scan(&self, filter: &EntityFilter) -> Result<Vec<Record>, StorageError> {
        let table = self.table(&filter.entity)?;
        filter.validate(self.schema_ref()?)?;
        let columns: Vec<(usize, Matcher)> = filter
            .predicates
            .iter()
            .map(|p| (table.column_index(&p.field).expect("validated"), Matcher::new(&p.op)))
            .collect();
        let corrupt = |e: RowError| StorageError::Corrupt { path: format!("{}.tbl", filter.entity).into(), message: e.0 };
        let mut out = Vec::new();
        for row in table.rows.values() {
            let mut keep = true;
            for (idx, matcher) in &columns {
                if !cell_matches(table, row, *idx, matcher).map_err(corrupt)? {
                    keep = false;
                    break;
                }
            }
            if !keep {
                continue;
            }
            out.push(self.decode(&filter.entity, table, row)?);
        }
        Ok(out)
    }

    fn satellite_history(&self, satellite: &str, parent: &BusinessKey) -> Result<Vec<SatelliteRecord>, StorageError> {
        let table = self.table(satellite)?;
        if table.kind != EntityKind::Satellite {
            return Err(StorageError::WrongKind { entity: satellite.to_owned(), expected: "satellite" });
        }
        let prefix = sat_prefix(parent);
        table
            .rows
            .range(prefix.clone()..)
            .take_while(|(k, _)| k.starts_with(&prefix))
            .filter(|(k, _)| k.len() == prefix.len() + 8)
            .map(|(_, row)| Ok(self.decode(satellite, table, row)?.into_satellite().expect("satellite table")))
            .collect()
    }

    fn count(&self, entity: &str) -> Result<usize, StorageError> {
        Ok(self.table(entity)?.rows.len())
    }

    fn storage_report(&self) -> StorageReport {
        let entities = self
            .schema
            .iter()
            .flat_map(|s| s.entity_names())
            .filter_map(|name| {
                self.tables.get(name).map(|t| EntityStorage {
                    entity: name.to_owned(),
                    records: t.rows.len(),
                    data_bytes: t.data_bytes(),
                    index_bytes: t.index_bytes(),
                })
            })
            .collect();
        StorageReport { backend: BackendKind::Relational, page_size: Some(PAGE_SIZE), entities }
    }

    fn save(&self, dir: &Path) -> Result<(), StorageError> {
        let schema = self.schema_ref()?;
        clear_data_files(dir, &["tbl", "idx"])?;
        write_schema(dir, schema)?;
        for (entity, table) in &self.tables {
            let mut data = Vec::with_capacity(table.data_bytes() as usize);
            let mut index = vec![0u8; INDEX_METAPAGE_BYTES as usize];
            index[..8].copy_from_slice(INDEX_MAGIC);
            index[8..16].copy_from_slice(&(table.rows.len() as u64).to_le_bytes());
            let name = entity.as_bytes();
            let name_len = name.len().min(INDEX_METAPAGE_BYTES as usize - 20);
            index[16..20].copy_from_slice(&(name_len as u32).to_le_bytes());
            index[20..20 + name_len].copy_from_slice(&name[..name_len]);
            for (pk, row) in &table.rows {
                index.extend_from_slice(&(pk.len() as u32).to_le_bytes());
                index.extend_from_slice(pk);
                index.extend_from_slice(&(data.len() as u64).to_le_bytes());
                index.extend_from_slice(&(row.len() as u32).to_le_bytes());
                data.extend_from_slice(&(row.len() as u32).to_le_bytes());
                data.extend_from_slice(row);
            }
            data.resize(table.data_bytes() as usize, 0);
            for (ext, bytes) in [("tbl", &data), ("idx", &index)] {
                let path = dir.join(format!("{entity}.{ext}"));
                std::fs::write(&path, bytes).map_err(|e| StorageError::io(&path, e))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_roundtrip_with_absent_columns() {
        let cells = vec![
            Some(Cell::Text("abc".into())),
            None,
            Some(Cell::List(vec!["x".into(), "yz".into()])),
            Some(Cell::Int(-5)),
        ];
        let row = encode_row(&cells);
        assert_eq!(row.len() % 8, 0);
        // header + (4+3) + (4 + 4+1 + 4+2) + 8 = 24 + 7 + 15 + 8 = 54 → 56
        assert_eq!(row.len(), 56);
        let table = Table {
            kind: EntityKind::Satellite,
            columns: vec![
                Column { name: "a".into(), ty: ColumnType::Text },
                Column { name: "b".into(), ty: ColumnType::Text },
                Column { name: "c".into(), ty: ColumnType::TextList },
                Column { name: "d".into(), ty: ColumnType::Timestamp },
            ],
            members: Vec::new(),
            rows: BTreeMap::new(),
        };
        assert_eq!(decode_cells(&table, &row).unwrap(), cells);
        assert_eq!(read_cell(&table, &row, 3).unwrap(), Some(Cell::Int(-5)));
        assert_eq!(read_cell(&table, &row, 1).unwrap(), None);
    }

    #[test]
    fn satellite_keys_sort_chronologically() {
        let p = BusinessKey::from_raw("k");
        let early = sat_pk(&p, Timestamp::from_millis(-10));
        let late = sat_pk(&p, Timestamp::from_millis(5));
        assert!(early < late);
        assert_eq!(pk_datetime(&early), Timestamp::from_millis(-10));
    }

    #[test]
    fn truncated_rows_are_reported() {
        let table = Table {
            kind: EntityKind::Satellite,
            columns: vec![Column { name: "a".into(), ty: ColumnType::Text }],
            members: Vec::new(),
            rows: BTreeMap::new(),
        };
        let mut row = encode_row(&[Some(Cell::Text("hello".into()))]);
        row.truncate(26);
        assert!(decode_cells(&table, &row).is_err());
    }
}
