use std::collections::HashMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use log::{info, warn};

use newsgrid::aggregate::Article;
use newsgrid::classify::{ExternalPredictions, SoftmaxClassifier};
use newsgrid::dataset::{
    compute_stats, load_dataset, load_sitemaps, prepare_pages, validate as validate_pages, DatasetError, MappedPage,
    PageRecord, ValidationConfig,
};
use newsgrid::dom::parse_and_clean;
use newsgrid::evaluate::{evaluate_method, run_experiment, EvalReport, EvaluateError, ExperimentConfig, ExtractionMethod, ScoringConfig};
use newsgrid::featurize::write_chunks;
use newsgrid::pipeline::{
    featurize_tree, train_softmax, ArticleLookup, ClassifierMethod, HeuristicMethod, SoftmaxMethod, TranslatedMethod,
};
use newsgrid::translate::{
    translate_tree, CachedBackend, GlossaryBackend, IdentityBackend, RemoteBackend, RemoteConfig, TranslationBackend,
};

use crate::config::{MethodSpec, RunConfig, TranslatorSpec};
use crate::{CliError, Format};

/// Environment variable naming the translation cache file.
pub const CACHE_ENV: &str = "NEWSGRID_CACHE";

fn dataset_error(e: DatasetError) -> CliError {
    match e {
        DatasetError::Io { .. } => CliError::Failed(e.into()),
        other => CliError::Usage(other.to_string()),
    }
}

fn load_records(cfg: &RunConfig) -> Result<Vec<PageRecord>, CliError> {
    let root = cfg.dataset()?;
    let mut records = load_dataset(root).map_err(dataset_error)?;
    if !cfg.languages.is_empty() {
        records.retain(|r| cfg.languages.contains(&r.language));
    }
    info!("{} pages loaded from {}", records.len(), root.display());
    Ok(records)
}

/// Parsed and mapped pages; unparseable pages are skipped with a warning.
fn load_pages(cfg: &RunConfig) -> Result<Vec<MappedPage>, CliError> {
    let records = load_records(cfg)?;
    let mut pages = Vec::with_capacity(records.len());
    for (rec, res) in records.iter().zip(prepare_pages(&records)) {
        match res {
            Ok(p) => pages.push(p),
            Err(e) => warn!("{}: skipped: {e}", rec.page_key),
        }
    }
    Ok(pages)
}

fn create_parent(path: &Path) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    Ok(())
}

fn write_file(path: &Path, body: &str) -> anyhow::Result<()> {
    create_parent(path)?;
    fs::write(path, body).with_context(|| format!("cannot write {}", path.display()))
}

fn shared<B: TranslationBackend + 'static>(backend: B) -> Result<Arc<dyn TranslationBackend>, CliError> {
    match std::env::var_os(CACHE_ENV) {
        Some(path) => {
            let cached = CachedBackend::open(backend, Path::new(&path)).map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(Arc::new(cached))
        }
        None => Ok(Arc::new(backend)),
    }
}

pub fn backend(cfg: &RunConfig) -> Result<Arc<dyn TranslationBackend>, CliError> {
    let usage = |e: newsgrid::translate::TranslateError| CliError::Usage(e.to_string());
    match &cfg.translator {
        TranslatorSpec::Identity => shared(IdentityBackend),
        TranslatorSpec::Glossary(path) => shared(GlossaryBackend::load(path).map_err(usage)?),
        TranslatorSpec::Remote(url) => {
            let rc = RemoteConfig {
                batch_size: cfg.translate_batch,
                ..RemoteConfig::default()
            };
            shared(RemoteBackend::new(url.clone(), rc).map_err(usage)?)
        }
    }
}

fn load_articles(dir: &Path) -> Result<ArticleLookup, CliError> {
    let mut files = Vec::new();
    collect_files(dir, "json", &mut files).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
    let mut articles = HashMap::new();
    for f in files {
        let raw = fs::read_to_string(&f).with_context(|| format!("cannot read {}", f.display()))?;
        let a: Article =
            serde_json::from_str(&raw).map_err(|e| CliError::Usage(format!("{}: not an article: {e}", f.display())))?;
        articles.insert(a.url.clone(), a);
    }
    Ok(ArticleLookup {
        name: format!("articles({})", dir.display()),
        articles,
    })
}

fn base_method(cfg: &RunConfig) -> Result<Box<dyn ExtractionMethod>, CliError> {
    let config = cfg.pipeline.clone();
    Ok(match &cfg.method {
        MethodSpec::Heuristic => Box::new(HeuristicMethod),
        MethodSpec::Softmax => Box::new(SoftmaxMethod { config }),
        MethodSpec::Checkpoint(path) => {
            let model = SoftmaxClassifier::<f64>::load(path).map_err(|e| CliError::Usage(e.to_string()))?;
            Box::new(ClassifierMethod {
                classifier: Arc::new(model),
                config,
            })
        }
        MethodSpec::External(dir) => {
            let preds = ExternalPredictions::<f64>::load_dir(dir).map_err(|e| CliError::Usage(e.to_string()))?;
            Box::new(ClassifierMethod {
                classifier: Arc::new(preds),
                config,
            })
        }
        MethodSpec::Articles(dir) => Box::new(load_articles(dir)?),
    })
}

fn method(cfg: &RunConfig) -> Result<Box<dyn ExtractionMethod>, CliError> {
    let inner = base_method(cfg)?;
    if !cfg.translate {
        return Ok(inner);
    }
    Ok(Box::new(TranslatedMethod {
        inner,
        backend: backend(cfg)?,
    }))
}

pub fn validate(cfg: &RunConfig, format: Format) -> Result<(), CliError> {
    let records = load_records(cfg)?;
    let sitemaps = load_sitemaps(cfg.dataset()?).map_err(dataset_error)?;
    let vc = ValidationConfig {
        min_text_chars: cfg.min_text_chars,
    };
    let report = validate_pages(&records, &sitemaps, &vc);
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).context("serializing report")?),
        Format::Text => {
            for f in &report.findings {
                let kind = f.kind.map(|k| k.to_string()).unwrap_or_else(|| "-".into());
                let what = serde_json::to_string(&f.finding).context("serializing finding")?;
                println!("{}\t{}\t{}", f.page, kind, what);
            }
            println!("{} pages checked, {} findings", report.pages_checked, report.findings.len());
        }
    }
    if report.is_clean() {
        Ok(())
    } else {
        Err(CliError::Partial(format!("{} findings", report.findings.len())))
    }
}

pub fn stats(cfg: &RunConfig, format: Format) -> Result<(), CliError> {
    let records: Vec<PageRecord> = load_pages(cfg)?.into_iter().map(|p| p.record).collect();
    let stats = compute_stats(&records);
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&stats).context("serializing stats")?),
        Format::Text => print!("{}", stats.to_table()),
    }
    Ok(())
}

pub fn featurize(cfg: &RunConfig, _: Format) -> Result<(), CliError> {
    let pages = load_pages(cfg)?;
    let mut chunks = Vec::new();
    let mut failed = 0;
    for p in &pages {
        match featurize_tree(p.page_id(), &p.tree, Some(p), &cfg.pipeline) {
            Ok(c) => chunks.extend(c),
            Err(e) => {
                warn!("{}: {e}", p.record.page_key);
                failed += 1;
            }
        }
    }
    match &cfg.output {
        Some(path) => {
            create_parent(path)?;
            let f = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            let mut w = BufWriter::new(f);
            write_chunks(&mut w, &chunks).context("writing chunks")?;
            w.flush().context("writing chunks")?;
            eprintln!("{} chunks from {} pages written to {}", chunks.len(), pages.len(), path.display());
        }
        None => write_chunks(io::stdout().lock(), &chunks).context("writing chunks")?,
    }
    if failed > 0 {
        return Err(CliError::Partial(format!("{failed} pages could not be featurized")));
    }
    Ok(())
}

pub fn train(cfg: &RunConfig, _: Format) -> Result<(), CliError> {
    let out = cfg.output()?;
    let pages = load_pages(cfg)?;
    let refs: Vec<&MappedPage> = pages.iter().collect();
    let model = train_softmax(&refs, &cfg.pipeline).context("training failed")?;
    write_file(out, &model.to_json())?;
    eprintln!("trained on {} pages; checkpoint written to {}", pages.len(), out.display());
    Ok(())
}

fn collect_files(dir: &Path, ext: &str, out: &mut Vec<PathBuf>) -> io::Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_files(&p, ext, out)?;
        } else if p.extension().is_some_and(|e| e == ext) {
            out.push(p);
        }
    }
    Ok(())
}

/// URL and language from the sibling page JSON, when there is one.
fn page_meta(html: &Path, default_lang: &str) -> (String, String) {
    let fallback_url = format!("file://{}", html.display());
    let meta = fs::read_to_string(html.with_extension("json"))
        .ok()
        .and_then(|raw| serde_json::from_str::<serde_json::Value>(&raw).ok());
    let field = |k: &str| {
        meta.as_ref()
            .and_then(|m| m.get(k))
            .and_then(|v| v.as_str())
            .map(str::to_string)
    };
    (
        field("url").unwrap_or(fallback_url),
        field("language").unwrap_or_else(|| default_lang.to_string()).to_ascii_lowercase(),
    )
}

fn extract_one(path: &Path, lang: &str, extractor: &dyn newsgrid::evaluate::PageExtractor) -> anyhow::Result<Article> {
    let html = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let (url, language) = page_meta(path, lang);
    let tree = parse_and_clean(&html, &url, &language)?;
    let page = MappedPage {
        record: PageRecord {
            site_id: newsgrid::dataset::site_id_of(&url),
            url,
            html,
            language,
            annotations: Vec::new(),
            page_key: String::new(),
            source_path: path.to_path_buf(),
        },
        tree,
    };
    extractor.extract(&page).map_err(anyhow::Error::msg)
}

pub fn extract(cfg: &RunConfig, input: &Path, lang: &str, _: Format) -> Result<(), CliError> {
    let (root, files) = if input.is_file() {
        let root = input.parent().unwrap_or(Path::new("")).to_path_buf();
        (root, vec![input.to_path_buf()])
    } else if input.is_dir() {
        let mut files = Vec::new();
        collect_files(input, "html", &mut files).with_context(|| format!("cannot list {}", input.display()))?;
        (input.to_path_buf(), files)
    } else {
        return Err(CliError::Usage(format!("{}: no such file or directory", input.display())));
    };
    if matches!(cfg.method, MethodSpec::Softmax | MethodSpec::Articles(_)) {
        return Err(CliError::Usage(
            "extract needs a fixed method: heuristic, softmax:<checkpoint> or external:<dir>".into(),
        ));
    }
    let m = method(cfg)?;
    let extractor = m.fit(&[]).map_err(|e| CliError::Failed(anyhow::Error::msg(e)))?;
    let mut failed = 0;
    for path in &files {
        match extract_one(path, lang, extractor.as_ref()) {
            Ok(article) => {
                let body = serde_json::to_string_pretty(&article).context("serializing article")? + "\n";
                match &cfg.output {
                    Some(out) => {
                        let rel = path.strip_prefix(&root).unwrap_or(path).with_extension("json");
                        write_file(&out.join(rel), &body)?;
                    }
                    None => print!("{body}"),
                }
            }
            Err(e) => {
                warn!("{}: {e:#}", path.display());
                failed += 1;
            }
        }
    }
    let summary = format!("{} pages, {failed} failed", files.len());
    if cfg.output.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    if !files.is_empty() && failed == files.len() {
        return Err(CliError::Partial("every page failed".into()));
    }
    Ok(())
}

fn emit_report(cfg: &RunConfig, report: &EvalReport, format: Format) -> Result<(), CliError> {
    if let Some(out) = &cfg.output {
        write_file(&out.join("report.json"), &(report.to_json() + "\n"))?;
        write_file(&out.join("report.txt"), &report.to_text())?;
    }
    match format {
        Format::Json => println!("{}", report.to_json()),
        Format::Text => print!("{}", report.to_text()),
    }
    Ok(())
}

pub fn evaluate(cfg: &RunConfig, format: Format) -> Result<(), CliError> {
    let pages = load_pages(cfg)?;
    if matches!(cfg.method, MethodSpec::Softmax) {
        return Err(CliError::Usage(
            "evaluate scores a fixed method; use crossval to train per fold or pass softmax:<checkpoint>".into(),
        ));
    }
    let m = method(cfg)?;
    let report = evaluate_method(&pages, m.as_ref(), &ScoringConfig::default());
    emit_report(cfg, &report, format)?;
    if report.failed_folds() > 0 {
        return Err(CliError::Partial("evaluation failed".into()));
    }
    Ok(())
}

pub fn crossval(cfg: &RunConfig, format: Format) -> Result<(), CliError> {
    let pages = load_pages(cfg)?;
    let m = method(cfg)?;
    let ec = ExperimentConfig {
        k: cfg.k,
        seed: cfg.seed,
        scoring: ScoringConfig::default(),
    };
    let report = match run_experiment(&cfg.design, &pages, m.as_ref(), &ec) {
        Ok(r) => r,
        Err(e @ EvaluateError::TooFewSites { .. }) => return Err(CliError::Usage(e.to_string())),
    };
    emit_report(cfg, &report, format)?;
    if report.succeeded_folds() == 0 {
        return Err(CliError::Partial("no fold succeeded".into()));
    }
    if report.failed_folds() > 0 {
        warn!("{} folds failed", report.failed_folds());
    }
    Ok(())
}

pub fn translate(cfg: &RunConfig, _: Format) -> Result<(), CliError> {
    let out = cfg.output()?.to_path_buf();
    let records = load_records(cfg)?;
    let backend = backend(cfg)?;
    let mut warnings = 0;
    for rec in &records {
        let tree = match parse_and_clean(&rec.html, &rec.url, &rec.language) {
            Ok(t) => t,
            Err(e) => {
                warn!("{}: skipped: {e}", rec.page_key);
                warnings += 1;
                continue;
            }
        };
        let t = translate_tree(&tree, &rec.language, backend.as_ref());
        if let Some(e) = &t.last_error {
            warn!("{}: {} nodes untranslated: {e}", rec.page_key, t.warnings);
        }
        warnings += t.warnings;
        let base = out.join(&rec.page_key);
        write_file(&base.with_extension("html"), &t.tree.to_html())?;
        let json = fs::read_to_string(&rec.source_path).with_context(|| format!("cannot read {}", rec.source_path.display()))?;
        write_file(&base.with_extension("json"), &json)?;
    }
    eprintln!("{} pages translated with {}, {warnings} warnings", records.len(), backend.name());
    if warnings > 0 {
        return Err(CliError::Partial(format!("{warnings} texts kept their original language")));
    }
    Ok(())
}
