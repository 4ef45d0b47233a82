//! Independent `.pptx` reader: zip container, content types, relationship
//! targets and the slide shapes, checked against the OPC and PresentationML
//! rules directly.

use std::collections::BTreeMap;
use std::io::{Cursor, Read};

use roxmltree::{Document, Node};

const P: &str = "http://schemas.openxmlformats.org/presentationml/2006/main";
const A: &str = "http://schemas.openxmlformats.org/drawingml/2006/main";
const R: &str = "http://schemas.openxmlformats.org/officeDocument/2006/relationships";
const SLIDE_CX: i64 = 12_192_000;
const SLIDE_CY: i64 = 6_858_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    pub name: String,
    pub x: i64,
    pub y: i64,
    pub cx: i64,
    pub cy: i64,
}

#[derive(Debug, Clone, Default)]
pub struct SlidePart {
    pub path: String,
    pub texts: Vec<String>,
    pub paragraphs: Vec<String>,
    pub pictures: usize,
    pub tables: usize,
    pub page_number_boxes: usize,
    pub shapes: Vec<Shape>,
}

#[derive(Debug, Clone, Default)]
pub struct Package {
    pub parts: BTreeMap<String, Vec<u8>>,
    /// Slides in presentation order.
    pub slides: Vec<SlidePart>,
}

fn local<'a>(node: Node<'a, '_>) -> &'a str {
    node.tag_name().name()
}

fn is(node: Node, ns: &str, name: &str) -> bool {
    node.is_element() && node.tag_name().namespace() == Some(ns) && local(node) == name
}

fn xml<'a>(parts: &'a BTreeMap<String, Vec<u8>>, path: &str) -> Result<Document<'a>, String> {
    let bytes = parts.get(path).ok_or_else(|| format!("missing part {path}"))?;
    let text = std::str::from_utf8(bytes).map_err(|e| format!("{path}: {e}"))?;
    Document::parse(text).map_err(|e| format!("{path}: {e}"))
}

/// `/ppt/slides/_rels/slide1.xml.rels` -> `ppt/slides/slide1.xml`'s folder.
fn rels_base(rels_path: &str) -> String {
    let source = rels_path.replace("_rels/", "").trim_end_matches(".rels").to_string();
    match source.rfind('/') {
        Some(i) => source[..i].to_string(),
        None => String::new(),
    }
}

/// `ppt/presentation.xml` -> `ppt/_rels/presentation.xml.rels`.
fn rels_of(part: &str) -> String {
    match part.rsplit_once('/') {
        Some((dir, file)) => format!("{dir}/_rels/{file}.rels"),
        None => format!("_rels/{part}.rels"),
    }
}

fn resolve(base: &str, target: &str) -> String {
    if let Some(abs) = target.strip_prefix('/') {
        return abs.to_string();
    }
    let mut segments: Vec<&str> = if base.is_empty() { Vec::new() } else { base.split('/').collect() };
    for seg in target.split('/') {
        match seg {
            ".." => {
                segments.pop();
            }
            "." | "" => {}
            s => segments.push(s),
        }
    }
    segments.join("/")
}

/// Relationship id -> resolved internal target of one `.rels` part.
fn relationships(parts: &BTreeMap<String, Vec<u8>>, rels_path: &str) -> Result<BTreeMap<String, String>, String> {
    let doc = xml(parts, rels_path)?;
    let base = rels_base(rels_path);
    let mut out = BTreeMap::new();
    for rel in doc.descendants().filter(|n| n.is_element() && local(*n) == "Relationship") {
        if rel.attribute("TargetMode") == Some("External") {
            continue;
        }
        let id = rel.attribute("Id").ok_or("relationship without Id")?;
        let target = rel.attribute("Target").ok_or("relationship without Target")?;
        out.insert(id.to_string(), resolve(&base, target));
    }
    Ok(out)
}

fn slide_part(parts: &BTreeMap<String, Vec<u8>>, path: &str) -> Result<SlidePart, String> {
    let doc = xml(parts, path)?;
    let root = doc.root_element();
    if !is(root, P, "sld") {
        return Err(format!("{path}: root is not p:sld"));
    }
    let mut slide = SlidePart { path: path.to_string(), ..SlidePart::default() };
    for node in root.descendants() {
        if is(node, A, "t") {
            slide.texts.push(node.text().unwrap_or_default().to_string());
        }
        if is(node, A, "p") {
            let text: String = node.descendants().filter(|n| is(*n, A, "t")).filter_map(|n| n.text()).collect();
            if !text.is_empty() {
                slide.paragraphs.push(text);
            }
        }
        if is(node, P, "pic") {
            slide.pictures += 1;
        }
        if is(node, A, "tbl") {
            slide.tables += 1;
        }
        if is(node, P, "sp") || is(node, P, "pic") || is(node, P, "graphicFrame") {
            let name = node
                .descendants()
                .find(|n| is(*n, P, "cNvPr"))
                .and_then(|n| n.attribute("name"))
                .ok_or_else(|| format!("{path}: shape without cNvPr name"))?
                .to_string();
            if name == "Page Number" {
                slide.page_number_boxes += 1;
            }
            let off = node.descendants().find(|n| is(*n, A, "off")).ok_or_else(|| format!("{path}: {name} has no a:off"))?;
            let ext = node.descendants().find(|n| is(*n, A, "ext") && n.has_attribute("cx")).ok_or_else(|| format!("{path}: {name} has no a:ext"))?;
            let num = |n: Node, a: &str| -> Result<i64, String> {
                n.attribute(a).ok_or_else(|| format!("{path}: missing {a}"))?.parse().map_err(|e| format!("{path}: {a}: {e}"))
            };
            slide.shapes.push(Shape { name, x: num(off, "x")?, y: num(off, "y")?, cx: num(ext, "cx")?, cy: num(ext, "cy")? });
        }
    }
    Ok(slide)
}

/// Reads and validates a package:
///
/// * every zip entry is a well-formed XML part or a binary with a content type,
/// * every internal relationship target exists,
/// * the presentation lists its slides through `p:sldIdLst`,
/// * every shape lies inside the slide size declared by `p:sldSz`.
pub fn read_pptx(bytes: &[u8]) -> Result<Package, String> {
    let mut archive = zip::ZipArchive::new(Cursor::new(bytes)).map_err(|e| format!("zip: {e}"))?;
    let mut parts = BTreeMap::new();
    for i in 0..archive.len() {
        let mut entry = archive.by_index(i).map_err(|e| format!("zip entry {i}: {e}"))?;
        if entry.is_dir() {
            continue;
        }
        let name = entry.name().map_err(|e| format!("zip entry {i}: {e}"))?.to_string();
        let mut data = Vec::new();
        entry.read_to_end(&mut data).map_err(|e| format!("{name}: {e}"))?;
        if parts.insert(name.clone(), data).is_some() {
            return Err(format!("duplicate zip entry {name}"));
        }
    }

    let types = xml(&parts, "[Content_Types].xml")?;
    let mut defaults = BTreeMap::new();
    let mut overrides = BTreeMap::new();
    for node in types.root_element().children().filter(|n| n.is_element()) {
        match local(node) {
            "Default" => {
                defaults.insert(
                    node.attribute("Extension").ok_or("Default without Extension")?.to_lowercase(),
                    node.attribute("ContentType").ok_or("Default without ContentType")?.to_string(),
                );
            }
            "Override" => {
                let name = node.attribute("PartName").ok_or("Override without PartName")?;
                overrides.insert(
                    name.trim_start_matches('/').to_string(),
                    node.attribute("ContentType").ok_or("Override without ContentType")?.to_string(),
                );
            }
            other => return Err(format!("unexpected {other} in content types")),
        }
    }
    for name in overrides.keys() {
        if !parts.contains_key(name) {
            return Err(format!("content type override for missing part {name}"));
        }
    }
    for name in parts.keys().filter(|n| *n != "[Content_Types].xml") {
        let ext = name.rsplit('.').next().unwrap_or_default().to_lowercase();
        let content_type = overrides.get(name).or_else(|| defaults.get(&ext)).ok_or_else(|| format!("no content type for {name}"))?;
        if content_type.ends_with("+xml") || ext == "xml" || ext == "rels" {
            xml(&parts, name)?;
        }
    }

    let rels_parts: Vec<String> = parts.keys().filter(|n| n.ends_with(".rels")).cloned().collect();
    for rels in &rels_parts {
        for (id, target) in relationships(&parts, rels)? {
            if !parts.contains_key(&target) {
                return Err(format!("{rels}: {id} targets missing part {target}"));
            }
        }
    }

    let root_rels = relationships(&parts, "_rels/.rels")?;
    let presentation = root_rels
        .values()
        .find(|t| t.ends_with("presentation.xml"))
        .ok_or("no officeDocument relationship")?
        .clone();
    let pres_rels = relationships(&parts, &rels_of(&presentation))?;
    let doc = xml(&parts, &presentation)?;
    let size = doc.descendants().find(|n| is(*n, P, "sldSz")).ok_or("no p:sldSz")?;
    if size.attribute("cx") != Some(&SLIDE_CX.to_string()) || size.attribute("cy") != Some(&SLIDE_CY.to_string()) {
        return Err(format!("unexpected slide size {:?}x{:?}", size.attribute("cx"), size.attribute("cy")));
    }
    let mut slides = Vec::new();
    for id in doc.descendants().filter(|n| is(*n, P, "sldId")) {
        let rid = id.attribute((R, "id")).ok_or("p:sldId without r:id")?;
        let target = pres_rels.get(rid).ok_or_else(|| format!("p:sldId {rid} has no relationship"))?;
        let slide = slide_part(&parts, target)?;
        for shape in &slide.shapes {
            let inside = shape.x >= 0 && shape.y >= 0 && shape.cx >= 0 && shape.cy >= 0
                && shape.x + shape.cx <= SLIDE_CX && shape.y + shape.cy <= SLIDE_CY;
            if !inside {
                return Err(format!("{}: {} {:?} leaves the slide", slide.path, shape.name, shape));
            }
        }
        slides.push(slide);
    }
    let slide_parts = parts.keys().filter(|n| n.starts_with("ppt/slides/slide") && n.ends_with(".xml")).count();
    if slide_parts != slides.len() {
        return Err(format!("{slide_parts} slide parts but {} listed slides", slides.len()));
    }
    Ok(Package { parts, slides })
}
