use std::io::Write;

use serde::Serialize;

use super::BackendKind;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntityStorage {
    pub entity: String,
    pub records: usize,
    pub data_bytes: u64,
    pub index_bytes: u64,
}

impl EntityStorage {
    pub fn total_bytes(&self) -> u64 {
        self.data_bytes + self.index_bytes
    }
}

/// Per-entity storage volume of one backend.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StorageReport {
    pub backend: BackendKind,
    /// Page size used for data accounting; `None` for the document backend.
    pub page_size: Option<u64>,
    pub entities: Vec<EntityStorage>,
}

impl Serialize for BackendKind {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> serde::Deserialize<'de> for BackendKind {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

impl StorageReport {
    pub fn total_bytes(&self) -> u64 {
        self.entities.iter().map(EntityStorage::total_bytes).sum()
    }

    pub fn entity(&self, name: &str) -> Option<&EntityStorage> {
        self.entities.iter().find(|e| e.entity == name)
    }

    /// CSV with columns `entity,data_bytes,index_bytes,total_bytes`, one row
    /// per entity followed by a `Total` row.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["entity", "data_bytes", "index_bytes", "total_bytes"])?;
        for e in &self.entities {
            w.write_record([
                e.entity.clone(),
                e.data_bytes.to_string(),
                e.index_bytes.to_string(),
                e.total_bytes().to_string(),
            ])?;
        }
        let data: u64 = self.entities.iter().map(|e| e.data_bytes).sum();
        let index: u64 = self.entities.iter().map(|e| e.index_bytes).sum();
        w.write_record(["Total".to_owned(), data.to_string(), index.to_string(), self.total_bytes().to_string()])?;
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let report = StorageReport {
            backend: BackendKind::Relational,
            page_size: Some(8192),
            entities: vec![
                EntityStorage { entity: "Hub_Title".into(), records: 2, data_bytes: 8192, index_bytes: 8256 },
                EntityStorage { entity: "Sat_Book".into(), records: 0, data_bytes: 0, index_bytes: 8192 },
            ],
        };
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "entity,data_bytes,index_bytes,total_bytes\nHub_Title,8192,8256,16448\nSat_Book,0,8192,8192\nTotal,8192,16448,24640\n"
        );
        assert_eq!(report.total_bytes(), 24640);
    }
}
