//! Single-file HTML presentation.
//!
//! Each visible slide is a `<section>` of `1280·HTML_SCALE × 720·HTML_SCALE`
//! pixels holding one absolutely positioned element per geometry box, at the
//! box rectangle times [`HTML_SCALE`]. Present mode shows one slide at a time,
//! stretched to the viewport, with arrow-key navigation.

use super::markdown::runs;
use super::{check_page_number, resolve, visible, ExportError};
use crate::notebook::table::escape;
use crate::notebook::{encode_base64, MediaPayload, Notebook};
use crate::slides::{BoxRef, GenerationParams, Rect, Slide, SlideGeometry, CANVAS_HEIGHT, CANVAS_WIDTH};

/// Pixels per canvas unit.
pub const HTML_SCALE: f64 = 0.75;

const STYLE: &str = concat!(
    "body{margin:0;background:#e5e5e5;font-family:Calibri,Arial,sans-serif}",
    ".slide{position:relative;overflow:hidden;background:#fff;margin:24px auto;box-shadow:0 1px 4px rgba(0,0,0,.3)}",
    ".box{position:absolute;box-sizing:border-box;margin:0;overflow:hidden}",
    ".title h1{margin:0;font-size:24px}",
    ".title.centered{display:flex;align-items:center;justify-content:center;text-align:center}",
    ".title.centered h1{font-size:33px}",
    ".bullets ul{margin:0;padding-left:1.2em;font-size:15px}",
    ".bullets li{margin-bottom:.4em}",
    ".table table{border-collapse:collapse;font-size:8px;width:100%}",
    ".table td{border:1px solid #bbb;padding:1px 3px}",
    ".page-number{font-size:9px;text-align:right}",
    "body.present{background:#000;overflow:hidden}",
    "body.present .slide{display:none;position:absolute;margin:0;box-shadow:none;transform-origin:0 0}",
    "body.present .slide.current{display:block}"
);

const PRESENT_SCRIPT: &str = concat!(
    "(function(){var s=document.querySelectorAll('.slide'),i=0;",
    "function fit(){var w=s[0].offsetWidth,h=s[0].offsetHeight,k=Math.min(innerWidth/w,innerHeight/h);",
    "s.forEach(function(e){e.style.transform='scale('+k+')';e.style.left=(innerWidth-w*k)/2+'px';e.style.top=(innerHeight-h*k)/2+'px';});}",
    "function show(n){i=Math.max(0,Math.min(s.length-1,n));s.forEach(function(e,j){e.classList.toggle('current',j===i);});}",
    "addEventListener('keydown',function(e){if(e.key==='ArrowRight'||e.key===' '||e.key==='PageDown')show(i+1);",
    "else if(e.key==='ArrowLeft'||e.key==='PageUp')show(i-1);else if(e.key==='Home')show(0);else if(e.key==='End')show(s.length-1);});",
    "addEventListener('resize',fit);fit();show(0);})();"
);

/// Shortest decimal form with at most three fraction digits.
fn px(v: f64) -> String {
    let s = format!("{:.3}", v * HTML_SCALE);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn position(rect: Rect) -> String {
    format!("left:{}px;top:{}px;width:{}px;height:{}px", px(rect.x), px(rect.y), px(rect.w), px(rect.h))
}

fn inline(text: &str) -> String {
    runs(text)
        .iter()
        .map(|r| {
            let mut s = escape(&r.text);
            if r.code {
                s = format!("<code>{s}</code>");
            }
            if r.italic {
                s = format!("<em>{s}</em>");
            }
            if r.bold {
                s = format!("<strong>{s}</strong>");
            }
            s
        })
        .collect()
}

fn section(slide: &Slide, geometry: &SlideGeometry, number: usize, notebook: &Notebook) -> Result<String, ExportError> {
    let mut out = format!(
        r#"<section class="slide" id="slide-{number}" data-slide="{}" style="width:{}px;height:{}px">"#,
        escape(slide.id.as_str()),
        px(geometry.width),
        px(geometry.height)
    );
    for placed in &geometry.boxes {
        let attrs = |class: &str, rect: Rect| {
            format!(r#"class="box {class}" data-box="{}" style="{}""#, placed.element, position(rect))
        };
        match placed.element {
            BoxRef::Title => {
                let class = if slide.template == crate::slides::Template::Title { "title centered" } else { "title" };
                out.push_str(&format!("<div {}><h1>{}</h1></div>", attrs(class, placed.rect), inline(&slide.title)));
            }
            BoxRef::Bullets => {
                let items: String = slide.bullets.iter().map(|b| format!("<li>{}</li>", inline(&b.text))).collect();
                out.push_str(&format!("<div {}><ul>{items}</ul></div>", attrs("bullets", placed.rect)));
            }
            BoxRef::Media(i) => {
                let media = slide.media.get(i).ok_or_else(|| {
                    ExportError::Layout(crate::slides::LayoutError::GeometryViolation(format!(
                        "slide {} has no {}",
                        slide.id, placed.element
                    )))
                })?;
                let item = resolve(notebook, media)?;
                match &item.payload {
                    MediaPayload::Png(bytes) => out.push_str(&format!(
                        r#"<img {} alt="Output of cell {}" src="data:image/png;base64,{}">"#,
                        attrs("chart", placed.drawn()),
                        escape(media.cell_id.as_str()),
                        encode_base64(bytes)
                    )),
                    MediaPayload::Html(_) => {
                        let rows: String = item
                            .table_rows()
                            .iter()
                            .map(|row| {
                                let cells: String = row.iter().map(|c| format!("<td>{}</td>", escape(c))).collect();
                                format!("<tr>{cells}</tr>")
                            })
                            .collect();
                        out.push_str(&format!("<div {}><table>{rows}</table></div>", attrs("table", placed.rect)));
                    }
                }
            }
            BoxRef::PageNumber => {
                out.push_str(&format!("<div {}>{number}</div>", attrs("page-number", placed.rect)));
            }
        }
    }
    out.push_str("</section>\n");
    Ok(out)
}

/// Renders the visible slides of `deck` as one self-contained HTML document.
pub fn export_html(
    deck: &[Slide],
    geometries: &[SlideGeometry],
    params: &GenerationParams,
    notebook: &Notebook,
    present: bool,
) -> Result<String, ExportError> {
    let slides = visible(deck, geometries)?;
    debug_assert!(geometries.iter().all(|g| g.width == CANVAS_WIDTH && g.height == CANVAS_HEIGHT));
    let mut body = String::new();
    for (n, (slide, geometry)) in slides.iter().enumerate() {
        check_page_number(geometry, params)?;
        body.push_str(&section(slide, geometry, n + 1, notebook)?);
    }
    let title = escape(&super::markdown::plain(&slides[0].0.title));
    let (class, script) = if present { ("present", format!("<script>{PRESENT_SCRIPT}</script>")) } else { ("deck", String::new()) };
    Ok(format!(
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>{title}</title>\n<style>{STYLE}</style>\n</head>\n<body class=\"{class}\">\n{body}{script}\n</body>\n</html>\n"
    ))
}
