//! `.pptx` writer.
//!
//! Parts, in archive order: content types, package relationships, the
//! presentation and its relationships, each slide with its relationships,
//! the PNG media, then one blank layout, one master, one theme and the
//! presentation and table-style properties. Every entry carries the same
//! fixed timestamp so archives are byte-reproducible.

use std::io::{Cursor, Write};

use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, DateTime, ZipWriter};

use super::markdown::{runs, Run};
use super::{check_page_number, resolve, visible, ExportError};
use crate::notebook::{MediaPayload, Notebook};
use crate::slides::{BoxRef, LayoutError, GenerationParams, PlacedBox, Rect, Slide, SlideGeometry, Template, CANVAS_HEIGHT, CANVAS_WIDTH};

/// One canvas unit in EMU: 12192000 / 1280 = 6858000 / 720.
pub const EMU_PER_UNIT: i64 = 9525;
pub const SLIDE_WIDTH_EMU: i64 = 12_192_000;
pub const SLIDE_HEIGHT_EMU: i64 = 6_858_000;

const NS: &str = r#"xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main" xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships" xmlns:p="http://schemas.openxmlformats.org/presentationml/2006/main""#;
const DECL: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n";
const REL_NS: &str = "http://schemas.openxmlformats.org/package/2006/relationships";
const REL_BASE: &str = "http://schemas.openxmlformats.org/officeDocument/2006/relationships";
const CT_BASE: &str = "application/vnd.openxmlformats-officedocument.presentationml";

fn emu(units: f64) -> i64 {
    (units * EMU_PER_UNIT as f64).round() as i64
}

/// Escapes markup characters and drops characters XML 1.0 forbids.
pub(crate) fn xml_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\t' | '\n' | '\r' => out.push(c),
            c if (c as u32) < 0x20 || c == '\u{FFFE}' || c == '\u{FFFF}' => {}
            c => out.push(c),
        }
    }
    out
}

fn xfrm(tag: &str, rect: Rect) -> String {
    format!(
        r#"<{tag}><a:off x="{}" y="{}"/><a:ext cx="{}" cy="{}"/></{tag}>"#,
        emu(rect.x),
        emu(rect.y),
        emu(rect.w),
        emu(rect.h)
    )
}

fn run_xml(run: &Run, size: u32) -> String {
    let mut attrs = format!(r#"lang="en-US" sz="{size}""#);
    if run.bold {
        attrs.push_str(r#" b="1""#);
    }
    if run.italic {
        attrs.push_str(r#" i="1""#);
    }
    let font = if run.code { r#"<a:latin typeface="Consolas"/>"# } else { "" };
    format!(r#"<a:r><a:rPr {attrs} dirty="0">{font}</a:rPr><a:t>{}</a:t></a:r>"#, xml_text(&run.text))
}

fn paragraph(text: &str, size: u32, ppr: &str) -> String {
    let body: String = runs(text).iter().map(|r| run_xml(r, size)).collect();
    let end = format!(r#"<a:endParaRPr lang="en-US" sz="{size}" dirty="0"/>"#);
    format!("<a:p>{ppr}{body}{end}</a:p>")
}

fn text_shape(id: usize, name: &str, rect: Rect, paragraphs: &str, anchor: &str) -> String {
    format!(
        concat!(
            r#"<p:sp><p:nvSpPr><p:cNvPr id="{id}" name="{name}"/><p:cNvSpPr txBox="1"/><p:nvPr/></p:nvSpPr>"#,
            r#"<p:spPr>{xfrm}<a:prstGeom prst="rect"><a:avLst/></a:prstGeom><a:noFill/></p:spPr>"#,
            r#"<p:txBody><a:bodyPr wrap="square" anchor="{anchor}"><a:normAutofit/></a:bodyPr><a:lstStyle/>{paragraphs}</p:txBody></p:sp>"#
        ),
        id = id,
        name = name,
        xfrm = xfrm("a:xfrm", rect),
        anchor = anchor,
        paragraphs = paragraphs
    )
}

fn picture(id: usize, rel: &str, descr: &str, rect: Rect) -> String {
    format!(
        concat!(
            r#"<p:pic><p:nvPicPr><p:cNvPr id="{id}" name="Chart {id}" descr="{descr}"/>"#,
            r#"<p:cNvPicPr><a:picLocks noChangeAspect="1"/></p:cNvPicPr><p:nvPr/></p:nvPicPr>"#,
            r#"<p:blipFill><a:blip r:embed="{rel}"/><a:stretch><a:fillRect/></a:stretch></p:blipFill>"#,
            r#"<p:spPr>{xfrm}<a:prstGeom prst="rect"><a:avLst/></a:prstGeom></p:spPr></p:pic>"#
        ),
        id = id,
        descr = xml_text(descr),
        rel = rel,
        xfrm = xfrm("a:xfrm", rect)
    )
}

/// Splits `total` EMU into `n` integer parts summing exactly to `total`.
fn split(total: i64, n: usize) -> Vec<i64> {
    let n = n.max(1) as i64;
    (0..n).map(|i| total * (i + 1) / n - total * i / n).collect()
}

fn table(id: usize, rows: &[Vec<String>], rect: Rect) -> String {
    let fallback = [vec![String::new()]];
    let rows = if rows.is_empty() { &fallback[..] } else { rows };
    let cols = rows.iter().map(Vec::len).max().unwrap_or(1).max(1);
    let grid: String = split(emu(rect.w), cols).iter().map(|w| format!(r#"<a:gridCol w="{w}"/>"#)).collect();
    let heights = split(emu(rect.h), rows.len());
    let body: String = rows
        .iter()
        .zip(heights)
        .map(|(row, h)| {
            let cells: String = (0..cols)
                .map(|c| {
                    let text = row.get(c).map(String::as_str).unwrap_or("");
                    format!(
                        r#"<a:tc><a:txBody><a:bodyPr/><a:lstStyle/><a:p><a:r><a:rPr lang="en-US" sz="1000" dirty="0"/><a:t>{}</a:t></a:r></a:p></a:txBody><a:tcPr/></a:tc>"#,
                        xml_text(text)
                    )
                })
                .collect();
            format!(r#"<a:tr h="{h}">{cells}</a:tr>"#)
        })
        .collect();
    format!(
        concat!(
            r#"<p:graphicFrame><p:nvGraphicFramePr><p:cNvPr id="{id}" name="Table {id}"/>"#,
            r#"<p:cNvGraphicFramePr><a:graphicFrameLocks noGrp="1"/></p:cNvGraphicFramePr><p:nvPr/></p:nvGraphicFramePr>"#,
            r#"{xfrm}<a:graphic><a:graphicData uri="http://schemas.openxmlformats.org/drawingml/2006/table">"#,
            r#"<a:tbl><a:tblPr firstRow="1" bandRow="1"/><a:tblGrid>{grid}</a:tblGrid>{body}</a:tbl>"#,
            r#"</a:graphicData></a:graphic></p:graphicFrame>"#
        ),
        id = id,
        xfrm = xfrm("p:xfrm", rect),
        grid = grid,
        body = body
    )
}

const GROUP_HEADER: &str = concat!(
    r#"<p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>"#,
    r#"<p:grpSpPr><a:xfrm><a:off x="0" y="0"/><a:ext cx="0" cy="0"/><a:chOff x="0" y="0"/><a:chExt cx="0" cy="0"/></a:xfrm></p:grpSpPr>"#
);

struct SlidePart {
    xml: String,
    /// `(relationship id, media file name)` per embedded chart.
    images: Vec<(String, String)>,
}

fn slide_part(
    slide: &Slide,
    geometry: &SlideGeometry,
    number: usize,
    notebook: &Notebook,
    next_image: &mut usize,
) -> Result<(SlidePart, Vec<Vec<u8>>), ExportError> {
    let mut shapes = String::new();
    let mut images = Vec::new();
    let mut payloads = Vec::new();
    // Shape ids start at 2; 1 is the slide's group shape.
    for (id, placed) in (2..).zip(&geometry.boxes) {
        let PlacedBox { element, rect, .. } = placed;
        match element {
            BoxRef::Title => {
                let (size, ppr, anchor) = if slide.template == Template::Title {
                    (4400, r#"<a:pPr algn="ctr"/>"#, "ctr")
                } else {
                    (3200, "", "b")
                };
                let title = format!("**{}**", slide.title.replace('*', "\\*"));
                shapes.push_str(&text_shape(id, "Title", *rect, &paragraph(&title, size, ppr), anchor));
            }
            BoxRef::Bullets => {
                let ppr = r#"<a:pPr marL="342900" indent="-342900"><a:buFont typeface="Arial"/><a:buChar char="&#8226;"/></a:pPr>"#;
                let body: String = slide.bullets.iter().map(|b| paragraph(&b.text, 2000, ppr)).collect();
                shapes.push_str(&text_shape(id, "Bullets", *rect, &body, "t"));
            }
            BoxRef::Media(i) => {
                let media = slide.media.get(*i).ok_or_else(|| {
                    ExportError::Layout(LayoutError::GeometryViolation(format!("slide {} has no {element}", slide.id)))
                })?;
                let item = resolve(notebook, media)?;
                match &item.payload {
                    MediaPayload::Png(bytes) => {
                        *next_image += 1;
                        let rel = format!("rId{}", images.len() + 2);
                        let name = format!("image{next_image}.png");
                        shapes.push_str(&picture(id, &rel, &format!("Output of cell {}", media.cell_id), placed.drawn()));
                        images.push((rel, name));
                        payloads.push(bytes.clone());
                    }
                    MediaPayload::Html(_) => shapes.push_str(&table(id, &item.table_rows(), *rect)),
                }
            }
            BoxRef::PageNumber => {
                let field = format!(
                    r#"<a:p><a:pPr algn="r"/><a:fld id="{{B6F15528-21DE-4FAA-801E-634DDDAF4B2B}}" type="slidenum"><a:rPr lang="en-US" sz="1200"/><a:t>{number}</a:t></a:fld></a:p>"#
                );
                shapes.push_str(&text_shape(id, "Page Number", *rect, &field, "ctr"));
            }
        }
    }
    let xml = format!(
        "{DECL}<p:sld {NS}><p:cSld><p:spTree>{GROUP_HEADER}{shapes}</p:spTree></p:cSld><p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sld>"
    );
    Ok((SlidePart { xml, images }, payloads))
}

fn relationships(rels: &[(String, &str, String)]) -> String {
    let body: String = rels
        .iter()
        .map(|(id, kind, target)| format!(r#"<Relationship Id="{id}" Type="{REL_BASE}/{kind}" Target="{target}"/>"#))
        .collect();
    format!(r#"{DECL}<Relationships xmlns="{REL_NS}">{body}</Relationships>"#)
}

fn content_types(slides: usize) -> String {
    let mut overrides = vec![
        ("/ppt/presentation.xml".to_string(), format!("{CT_BASE}.presentation.main+xml")),
        ("/ppt/slideMasters/slideMaster1.xml".into(), format!("{CT_BASE}.slideMaster+xml")),
        ("/ppt/slideLayouts/slideLayout1.xml".into(), format!("{CT_BASE}.slideLayout+xml")),
        ("/ppt/theme/theme1.xml".into(), "application/vnd.openxmlformats-officedocument.theme+xml".into()),
        ("/ppt/presProps.xml".into(), format!("{CT_BASE}.presProps+xml")),
        ("/ppt/tableStyles.xml".into(), format!("{CT_BASE}.tableStyles+xml")),
    ];
    for n in 1..=slides {
        overrides.push((format!("/ppt/slides/slide{n}.xml"), format!("{CT_BASE}.slide+xml")));
    }
    let body: String =
        overrides.iter().map(|(part, ct)| format!(r#"<Override PartName="{part}" ContentType="{ct}"/>"#)).collect();
    format!(
        concat!(
            "{}",
            r#"<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">"#,
            r#"<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>"#,
            r#"<Default Extension="xml" ContentType="application/xml"/>"#,
            r#"<Default Extension="png" ContentType="image/png"/>"#,
            "{}</Types>"
        ),
        DECL, body
    )
}

fn presentation(slides: usize) -> String {
    let ids: String = (0..slides).map(|n| format!(r#"<p:sldId id="{}" r:id="rId{}"/>"#, 256 + n, n + 2)).collect();
    format!(
        concat!(
            "{}<p:presentation {} saveSubsetFonts=\"1\">",
            r#"<p:sldMasterIdLst><p:sldMasterId id="2147483648" r:id="rId1"/></p:sldMasterIdLst>"#,
            r#"<p:sldIdLst>{}</p:sldIdLst><p:sldSz cx="{}" cy="{}"/><p:notesSz cx="6858000" cy="9144000"/>"#,
            "</p:presentation>"
        ),
        DECL, NS, ids, SLIDE_WIDTH_EMU, SLIDE_HEIGHT_EMU
    )
}

fn master() -> String {
    format!(
        concat!(
            "{}<p:sldMaster {}><p:cSld><p:bg><p:bgRef idx=\"1001\"><a:schemeClr val=\"bg1\"/></p:bgRef></p:bg>",
            "<p:spTree>{}</p:spTree></p:cSld>",
            r#"<p:clrMap bg1="lt1" tx1="dk1" bg2="lt2" tx2="dk2" accent1="accent1" accent2="accent2" accent3="accent3" accent4="accent4" accent5="accent5" accent6="accent6" hlink="hlink" folHlink="folHlink"/>"#,
            r#"<p:sldLayoutIdLst><p:sldLayoutId id="2147483649" r:id="rId1"/></p:sldLayoutIdLst>"#,
            "<p:txStyles><p:titleStyle/><p:bodyStyle/><p:otherStyle/></p:txStyles></p:sldMaster>"
        ),
        DECL, NS, GROUP_HEADER
    )
}

fn layout() -> String {
    format!(
        concat!(
            "{}<p:sldLayout {} type=\"blank\" preserve=\"1\"><p:cSld name=\"Blank\"><p:spTree>{}</p:spTree></p:cSld>",
            "<p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sldLayout>"
        ),
        DECL, NS, GROUP_HEADER
    )
}

fn theme() -> String {
    let colors = [
        ("dk1", "000000"),
        ("lt1", "FFFFFF"),
        ("dk2", "44546A"),
        ("lt2", "E7E6E6"),
        ("accent1", "4472C4"),
        ("accent2", "ED7D31"),
        ("accent3", "A5A5A5"),
        ("accent4", "FFC000"),
        ("accent5", "5B9BD5"),
        ("accent6", "70AD47"),
        ("hlink", "0563C1"),
        ("folHlink", "954F72"),
    ];
    let scheme: String = colors.iter().map(|(n, c)| format!(r#"<a:{n}><a:srgbClr val="{c}"/></a:{n}>"#)).collect();
    let fill = r#"<a:solidFill><a:schemeClr val="phClr"/></a:solidFill>"#;
    let line = r#"<a:ln w="6350"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:ln>"#;
    let effect = "<a:effectStyle><a:effectLst/></a:effectStyle>";
    format!(
        concat!(
            "{decl}<a:theme xmlns:a=\"http://schemas.openxmlformats.org/drawingml/2006/main\" name=\"Plain\"><a:themeElements>",
            "<a:clrScheme name=\"Plain\">{scheme}</a:clrScheme>",
            "<a:fontScheme name=\"Plain\"><a:majorFont><a:latin typeface=\"Calibri\"/><a:ea typeface=\"\"/><a:cs typeface=\"\"/></a:majorFont>",
            "<a:minorFont><a:latin typeface=\"Calibri\"/><a:ea typeface=\"\"/><a:cs typeface=\"\"/></a:minorFont></a:fontScheme>",
            "<a:fmtScheme name=\"Plain\"><a:fillStyleLst>{fill}{fill}{fill}</a:fillStyleLst>",
            "<a:lnStyleLst>{line}{line}{line}</a:lnStyleLst>",
            "<a:effectStyleLst>{effect}{effect}{effect}</a:effectStyleLst>",
            "<a:bgFillStyleLst>{fill}{fill}{fill}</a:bgFillStyleLst></a:fmtScheme>",
            "</a:themeElements></a:theme>"
        ),
        decl = DECL,
        scheme = scheme,
        fill = fill,
        line = line,
        effect = effect
    )
}

/// Writes the visible slides of `deck` as a `.pptx` archive. `geometries`
/// holds one entry per visible slide, in deck order.
pub fn export_pptx(
    deck: &[Slide],
    geometries: &[SlideGeometry],
    params: &GenerationParams,
    notebook: &Notebook,
) -> Result<Vec<u8>, ExportError> {
    let slides = visible(deck, geometries)?;
    debug_assert!(geometries.iter().all(|g| g.width == CANVAS_WIDTH && g.height == CANVAS_HEIGHT));
    let mut next_image = 0;
    let mut parts = Vec::new();
    for (n, (slide, geometry)) in slides.iter().enumerate() {
        check_page_number(geometry, params)?;
        parts.push(slide_part(slide, geometry, n + 1, notebook, &mut next_image)?);
    }

    let archive_err = |e: &dyn std::fmt::Display| ExportError::Archive(e.to_string());
    let options = SimpleFileOptions::default()
        .compression_method(CompressionMethod::Deflated)
        .last_modified_time(DateTime::default());
    let mut zip = ZipWriter::new(Cursor::new(Vec::new()));
    let mut put = |name: &str, bytes: &[u8]| -> Result<(), ExportError> {
        zip.start_file(name, options).map_err(|e| archive_err(&e))?;
        zip.write_all(bytes).map_err(|e| archive_err(&e))
    };

    put("[Content_Types].xml", content_types(parts.len()).as_bytes())?;
    put(
        "_rels/.rels",
        relationships(&[("rId1".into(), "officeDocument", "ppt/presentation.xml".into())]).as_bytes(),
    )?;
    put("ppt/presentation.xml", presentation(parts.len()).as_bytes())?;
    let mut pres_rels = vec![("rId1".to_string(), "slideMaster", "slideMasters/slideMaster1.xml".to_string())];
    for n in 1..=parts.len() {
        pres_rels.push((format!("rId{}", n + 1), "slide", format!("slides/slide{n}.xml")));
    }
    let k = parts.len() + 2;
    pres_rels.push((format!("rId{k}"), "presProps", "presProps.xml".into()));
    pres_rels.push((format!("rId{}", k + 1), "tableStyles", "tableStyles.xml".into()));
    pres_rels.push((format!("rId{}", k + 2), "theme", "theme/theme1.xml".into()));
    put("ppt/_rels/presentation.xml.rels", relationships(&pres_rels).as_bytes())?;

    for (n, (part, _)) in parts.iter().enumerate() {
        put(&format!("ppt/slides/slide{}.xml", n + 1), part.xml.as_bytes())?;
        let mut rels = vec![("rId1".to_string(), "slideLayout", "../slideLayouts/slideLayout1.xml".to_string())];
        rels.extend(part.images.iter().map(|(rel, name)| (rel.clone(), "image", format!("../media/{name}"))));
        put(&format!("ppt/slides/_rels/slide{}.xml.rels", n + 1), relationships(&rels).as_bytes())?;
    }
    for (part, payloads) in &parts {
        for ((_, name), bytes) in part.images.iter().zip(payloads) {
            put(&format!("ppt/media/{name}"), bytes)?;
        }
    }
    put("ppt/slideLayouts/slideLayout1.xml", layout().as_bytes())?;
    put(
        "ppt/slideLayouts/_rels/slideLayout1.xml.rels",
        relationships(&[("rId1".into(), "slideMaster", "../slideMasters/slideMaster1.xml".into())]).as_bytes(),
    )?;
    put("ppt/slideMasters/slideMaster1.xml", master().as_bytes())?;
    put(
        "ppt/slideMasters/_rels/slideMaster1.xml.rels",
        relationships(&[
            ("rId1".into(), "slideLayout", "../slideLayouts/slideLayout1.xml".into()),
            ("rId2".into(), "theme", "../theme/theme1.xml".into()),
        ])
        .as_bytes(),
    )?;
    put("ppt/theme/theme1.xml", theme().as_bytes())?;
    put("ppt/presProps.xml", format!("{DECL}<p:presentationPr {NS}/>").as_bytes())?;
    put(
        "ppt/tableStyles.xml",
        format!(r#"{DECL}<a:tblStyleLst xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main" def="{{5C22544A-7EE6-4342-B048-85BDC9FD1C3A}}"/>"#)
            .as_bytes(),
    )?;
    let cursor = zip.finish().map_err(|e| archive_err(&e))?;
    Ok(cursor.into_inner())
}
