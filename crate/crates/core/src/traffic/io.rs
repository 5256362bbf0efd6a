//! FoQ datasets as CSV with columns `movement_id, owner_id, t_s, h_m`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::TrafficError;
use crate::privacy::{FoQDataset, FoQPoint};

#[derive(Serialize, Deserialize)]
struct Row {
    movement_id: u32,
    owner_id: u32,
    t_s: f64,
    h_m: f64,
}

pub fn write_foq_csv<W: Write>(writer: W, datasets: &[FoQDataset]) -> Result<(), TrafficError> {
    let mut w = csv::Writer::from_writer(writer);
    for ds in datasets {
        for p in &ds.points {
            w.serialize(Row { movement_id: ds.movement, owner_id: ds.owner, t_s: p.t, h_m: p.h })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Groups rows by `(movement_id, owner_id)`, in ascending key order.
pub fn read_foq_csv<R: Read>(reader: R) -> Result<Vec<FoQDataset>, TrafficError> {
    let mut groups: BTreeMap<(u32, u32), Vec<FoQPoint>> = BTreeMap::new();
    for row in csv::Reader::from_reader(reader).deserialize() {
        let r: Row = row?;
        groups.entry((r.movement_id, r.owner_id)).or_default().push(FoQPoint::new(r.t_s, r.h_m));
    }
    Ok(groups.into_iter().map(|((m, o), points)| FoQDataset::new(m, o, points)).collect())
}
