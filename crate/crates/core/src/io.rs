//! Versioned JSON documents.
//!
//! Every file is `{"schema": "microset/<kind>", "version": 1, "data": ...}`
//! written as pretty JSON with a trailing newline. Field and cell orders are
//! canonical, so equal values give byte-identical files. Readers also accept
//! a bare `data` object.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::baire::TypicalityReport;
use crate::covers::{BallSpec, CoverReport, CoverSeq};
use crate::digital::DigitalSet;
use crate::dust::{DustSpec, DustTree, GapTable, SurvivorCertificate};
use crate::error::{Error, Result};
use crate::hausdorff::HBracket;

pub const VERSION: u32 = 1;

pub trait Schema {
    const KIND: &'static str;
}

macro_rules! schema {
    ($($t:ty => $k:literal),* $(,)?) => {
        $(impl Schema for $t {
            const KIND: &'static str = $k;
        })*
    };
}

schema! {
    DigitalSet => "digital-set",
    CoverSeq => "cover",
    CoverReport => "cover-report",
    BallSpec => "ball",
    DustSpec => "dust-spec",
    DustTree => "dust-tree",
    GapTable => "gap-table",
    SurvivorCertificate => "survivor-certificate",
    HBracket => "hausdorff-bracket",
    TypicalityReport => "typicality-report",
}

#[derive(Serialize)]
struct Out<'a, T> {
    schema: String,
    version: u32,
    data: &'a T,
}

#[derive(Deserialize)]
struct In {
    schema: String,
    version: u32,
    data: Value,
}

pub fn schema_name<T: Schema>() -> String {
    format!("microset/{}", T::KIND)
}

pub fn to_document<T: Schema + Serialize>(value: &T) -> String {
    let doc = Out {
        schema: schema_name::<T>(),
        version: VERSION,
        data: value,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("documents serialize");
    s.push('\n');
    s
}

/// Parses a document of kind `T`. Syntax errors carry line and column.
pub fn from_document<T: Schema + DeserializeOwned>(text: &str) -> Result<T> {
    let value: Value = serde_json::from_str(text)?;
    let is_envelope = value.get("schema").is_some() && value.get("data").is_some();
    if !is_envelope {
        return Ok(serde_json::from_str(text)?);
    }
    let doc: In = serde_json::from_value(value)?;
    if doc.schema != schema_name::<T>() {
        return Err(Error::Parse(format!(
            "expected schema {}, found {}",
            schema_name::<T>(),
            doc.schema
        )));
    }
    if doc.version != VERSION {
        return Err(Error::Parse(format!("unsupported schema version {}", doc.version)));
    }
    Ok(serde_json::from_value(doc.data)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let e = DigitalSet::new(2, 3, 1, vec![vec![0, 2], vec![1, 1]]).unwrap();
        let text = to_document(&e);
        assert!(text.starts_with("{\n  \"schema\": \"microset/digital-set\""));
        assert_eq!(from_document::<DigitalSet>(&text).unwrap(), e);
        assert_eq!(to_document(&from_document::<DigitalSet>(&text).unwrap()), text);
    }

    #[test]
    fn bare_payload_and_wrong_kind() {
        let bare = r#"{"n":1,"b":3,"m":1,"cells":[[0]]}"#;
        assert_eq!(from_document::<DigitalSet>(bare).unwrap().len(), 1);
        let e: DigitalSet = serde_json::from_str(bare).unwrap();
        assert!(from_document::<CoverSeq>(&to_document(&e)).is_err());
    }

    #[test]
    fn syntax_errors_have_positions() {
        let err = from_document::<DigitalSet>("{\n  \"n\": 1,\n  oops\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }
}
