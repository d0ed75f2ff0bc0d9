use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{AttributeAnnotation, AttributeKind, DatasetError, PageRecord, SelectorMap, Sitemap};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PageJson {
    url: String,
    language: String,
    #[serde(default)]
    attributes: AttributeValues,
    #[serde(default)]
    selectors: SelectorMap,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttributeValues {
    title: Option<Vec<String>>,
    date: Option<Vec<String>>,
    text: Option<Vec<String>>,
    authors: Option<Vec<String>>,
    tags: Option<Vec<String>>,
}

impl AttributeValues {
    fn take(&mut self, kind: AttributeKind) -> Option<Vec<String>> {
        match kind {
            AttributeKind::Title => self.title.take(),
            AttributeKind::Date => self.date.take(),
            AttributeKind::Text => self.text.take(),
            AttributeKind::Author => self.authors.take(),
            AttributeKind::Tag => self.tags.take(),
        }
    }
}

/// Registrable domain of `url` (public-suffix aware), falling back to the
/// bare host.
pub fn site_id_of(url: &str) -> String {
    let host = url::Url::parse(url)
        .ok()
        .and_then(|u| u.host_str().map(|h| h.to_ascii_lowercase()))
        .unwrap_or_else(|| url.to_ascii_lowercase());
    let host = host.trim_end_matches('.');
    psl::domain_str(host)
        .map(str::to_string)
        .unwrap_or_else(|| host.trim_start_matches("www.").to_string())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn page_index(name: &str) -> Option<u64> {
    name.strip_prefix("page_")?.strip_suffix(".json")?.parse().ok()
}

/// Loads one `page_<k>.json` together with its sibling `.html` file.
pub fn load_page(json_path: &Path, root: &Path) -> Result<PageRecord, DatasetError> {
    let raw = fs::read_to_string(json_path).map_err(io_err(json_path))?;
    let de = &mut serde_json::Deserializer::from_str(&raw);
    let mut page: PageJson = serde_path_to_error::deserialize(de).map_err(|e| {
        DatasetError::SchemaError {
            path: json_path.to_path_buf(),
            field: e.path().to_string(),
            message: e.inner().to_string(),
        }
    })?;
    let schema = |field: &str, message: &str| DatasetError::SchemaError {
        path: json_path.to_path_buf(),
        field: field.to_string(),
        message: message.to_string(),
    };
    if page.url.trim().is_empty() {
        return Err(schema("url", "must not be empty"));
    }
    if page.language.trim().is_empty() {
        return Err(schema("language", "must not be empty"));
    }

    let html_path = json_path.with_extension("html");
    if !html_path.is_file() {
        return Err(DatasetError::MissingHtml { path: html_path });
    }
    let html = fs::read(&html_path).map_err(io_err(&html_path))?;

    let mut annotations = Vec::new();
    for kind in AttributeKind::ALL {
        let selector = page.selectors.get(kind).cloned();
        let Some(values) = page.attributes.take(kind) else {
            continue;
        };
        if values.is_empty() {
            return Err(schema(
                &format!("attributes.{}", kind.json_key()),
                "annotated attribute needs at least one value",
            ));
        }
        let mut ann = AttributeAnnotation::new(kind, values);
        ann.selector = selector;
        annotations.push(ann);
    }

    let page_key = json_path
        .strip_prefix(root)
        .unwrap_or(json_path)
        .with_extension("")
        .to_string_lossy()
        .replace('\\', "/");
    Ok(PageRecord {
        site_id: site_id_of(&page.url),
        url: page.url,
        html,
        language: page.language.to_ascii_lowercase(),
        annotations,
        page_key,
        source_path: json_path.to_path_buf(),
    })
}

fn sorted_dirs(root: &Path) -> Result<Vec<PathBuf>, DatasetError> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(io_err(root))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    Ok(dirs)
}

/// Loads every page under `root`, ordered by site directory then page index.
pub fn load_dataset(root: &Path) -> Result<Vec<PageRecord>, DatasetError> {
    if !root.is_dir() {
        return Err(DatasetError::MissingRoot {
            path: root.to_path_buf(),
        });
    }
    let mut records = Vec::new();
    for dir in sorted_dirs(root)? {
        let mut pages: Vec<(u64, PathBuf)> = fs::read_dir(&dir)
            .map_err(io_err(&dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter_map(|p| {
                let k = page_index(p.file_name()?.to_str()?)?;
                Some((k, p))
            })
            .collect();
        pages.sort();
        for (_, path) in pages {
            records.push(load_page(&path, root)?);
        }
    }
    Ok(records)
}

/// Reads `<site dir>/sitemap.json` files, sorted by site id.
pub fn load_sitemaps(root: &Path) -> Result<Vec<Sitemap>, DatasetError> {
    if !root.is_dir() {
        return Err(DatasetError::MissingRoot {
            path: root.to_path_buf(),
        });
    }
    let mut maps = Vec::new();
    for dir in sorted_dirs(root)? {
        let path = dir.join("sitemap.json");
        if !path.is_file() {
            continue;
        }
        let raw = fs::read_to_string(&path).map_err(io_err(&path))?;
        let de = &mut serde_json::Deserializer::from_str(&raw);
        let map: Sitemap =
            serde_path_to_error::deserialize(de).map_err(|e| DatasetError::SchemaError {
                path: path.clone(),
                field: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        maps.push(map);
    }
    maps.sort_by(|a, b| a.site_id.cmp(&b.site_id));
    Ok(maps)
}
