use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use ym_core::document::{Document, DocumentError, FunctionDocument};
use ym_core::exprfn::PartitionedFunction;

use crate::failure::Failure;

pub const SCHEMA: &str = "ym/1";

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema: &'static str,
    #[serde(flatten)]
    body: &'a T,
}

pub fn read_document(path: &Path) -> Result<Document, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Document::from_json(&text).map_err(|e| document_failure(path, e))
}

pub fn document_failure(path: &Path, e: DocumentError) -> Failure {
    let msg = format!("{}: {e}", path.display());
    if e.is_structural() {
        Failure::Validation(msg)
    } else {
        Failure::Input(msg)
    }
}

pub fn read_function(path: &Path) -> Result<(FunctionDocument, PartitionedFunction), Failure> {
    match read_document(path)? {
        Document::Function(doc) => {
            let u = doc.build().map_err(|e| document_failure(path, e))?;
            Ok((doc, u))
        }
        Document::Density(_) => Err(Failure::Input(format!(
            "{}: expected a function document",
            path.display()
        ))),
    }
}

/// `*.json` files of a directory ordered by the number their name starts
/// with, then by name.
pub fn numbered_documents(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?
            .path();
        if path.extension().is_some_and(|x| x == "json") && path.is_file() {
            files.push(path);
        }
    }
    let key = |p: &PathBuf| {
        let name = p
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let digits: String = name.chars().take_while(char::is_ascii_digit).collect();
        (digits.parse::<u64>().unwrap_or(u64::MAX), name)
    };
    files.sort_by_key(key);
    if files.is_empty() {
        return Err(Failure::Input(format!("{}: no .json documents found", dir.display())));
    }
    Ok(files)
}

pub fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Writes through a temporary file in the same directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Io(format!("{}: {e}", path.display()));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// Pretty JSON with the schema tag first.
pub fn write_report<T: Serialize>(path: &Path, body: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(&Versioned { schema: SCHEMA, body })
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
