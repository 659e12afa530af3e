//! Deterministic synthetic corpus shaped like the industrial-heritage lake.
//!
//! Per scale unit: 49 inventory notices, one press dossier of 30 articles,
//! 30 pictures and 165 book records, i.e. 245 files and 274 instances.
//!
//! Predicate hit rates are fixed per source (press excluded, its title
//! never matches): 20% of titles contain "factory"; 40% of those are
//! located in Tourcoing; 50% of the factory-Tourcoing ones were deposited
//! in 2010. Counts are rounded half up per source. Other documents are
//! located in Tourcoing with probability 0.20 and deposited in 2010 with
//! probability 0.25; 10% of them have no location and 5% no date. Pictures
//! outside the factory quota lack a sidecar with probability 0.2. One book
//! reproduces the Sat_Book record `00000C842_001`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

pub const INVENTORY_PER_SCALE: usize = 49;
pub const PRESS_FILES_PER_SCALE: usize = 1;
pub const ARTICLES_PER_DOSSIER: usize = 30;
pub const PICTURES_PER_SCALE: usize = 30;
pub const BOOKS_PER_SCALE: usize = 165;
pub const MANIFEST_FILE: &str = "manifest.txt";

/// Percentages of the nested quotas.
pub const FACTORY_PERCENT: usize = 20;
pub const TOURCOING_GIVEN_FACTORY_PERCENT: usize = 40;
pub const YEAR_GIVEN_FACTORY_TOURCOING_PERCENT: usize = 50;
pub const QUERY_YEAR: i32 = 2010;

const TOURCOING: &str = "Tourcoing";
const OTHER_TOWNS: [&str; 10] = [
    "Roubaix", "Lille", "Villeneuve d'Ascq", "Armentières", "Wattrelos", "Croix", "Halluin", "Comines", "Calais", "Lannoy",
];
const FACTORY_TITLES: [&str; 8] = [
    "Wool combing factory",
    "Cotton spinning factory",
    "Former weaving factory",
    "Dye works and factory",
    "Linen factory",
    "Carpet factory",
    "Velvet factory",
    "Hosiery factory",
];
const OTHER_TITLES: [&str; 12] = [
    "Filature",
    "Tissage",
    "Peignage de laine",
    "Maison de maître",
    "Cité ouvrière",
    "Teinturerie",
    "Entrepôt",
    "Chaufferie",
    "Bureau de la direction",
    "Conditionnement public",
    "Corderie",
    "Blanchisserie",
];
const OWNERS: [&str; 10] = [
    "Motte-Bossut", "Prouvost", "Lepoutre", "Tiberghien", "Masurel", "Dewavrin", "Screpel", "Vanoutryve", "Holden", "Lemaire",
];
const STREETS: [&str; 8] = [
    "rue de la Gare", "boulevard Gambetta", "rue de Lille", "quai de Marseille", "rue du Brun Pain", "avenue de la Marne",
    "rue de Mouvaux", "rue Nationale",
];
const EPOCHS: [&str; 5] = ["3e quart 19e siècle", "4e quart 19e siècle", "1er quart 20e siècle", "2e quart 20e siècle", "milieu 19e siècle"];
const AUTHORS: [&str; 8] = [
    "Petit, Jules", "Duhamel, Louise", "Lefebvre, Georges", "Martin, Henri", "Delattre, Anne", "Vandame, Paul",
    "Service régional de l'Inventaire", "Chambre de commerce de Lille",
];
const KEYWORDS: [&str; 8] = ["textile", "laine", "coton", "architecture industrielle", "patrimoine", "usine", "brique", "shed"];
const HEADLINES: [&str; 6] = [
    "La dernière filature ferme ses portes",
    "Les anciens ouvriers se souviennent",
    "Reconversion d'un site textile",
    "Le patrimoine industriel en débat",
    "Une cheminée classée",
    "Les friches de la métropole",
];

/// A generated corpus: relative file path → contents, including the
/// manifest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedCorpus {
    pub scale: usize,
    pub seed: u64,
    pub files: BTreeMap<String, Vec<u8>>,
}

impl GeneratedCorpus {
    /// Writes every file under `dir` and returns the manifest path.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<PathBuf> {
        for (rel, bytes) in &self.files {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, bytes)?;
        }
        Ok(dir.join(MANIFEST_FILE))
    }

    pub fn expected_documents(&self) -> usize {
        self.scale * (INVENTORY_PER_SCALE + PRESS_FILES_PER_SCALE + PICTURES_PER_SCALE + BOOKS_PER_SCALE)
    }

    pub fn expected_instances(&self) -> usize {
        self.scale * (INVENTORY_PER_SCALE + PRESS_FILES_PER_SCALE * ARTICLES_PER_DOSSIER + PICTURES_PER_SCALE + BOOKS_PER_SCALE)
    }
}

fn round_percent(n: usize, percent: usize) -> usize {
    (n * percent + 50) / 100
}

/// Quota flags for one source.
#[derive(Clone, Copy, Debug, Default)]
struct Traits {
    factory: bool,
    tourcoing: bool,
    in_year: bool,
    no_location: bool,
    no_date: bool,
}

fn assign_traits(rng: &mut ChaCha8Rng, n: usize) -> Vec<Traits> {
    let factory = round_percent(n, FACTORY_PERCENT);
    let tourcoing = round_percent(factory, TOURCOING_GIVEN_FACTORY_PERCENT);
    let in_year = round_percent(tourcoing, YEAR_GIVEN_FACTORY_TOURCOING_PERCENT);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut traits = vec![Traits::default(); n];
    for (rank, &i) in order.iter().enumerate() {
        let t = &mut traits[i];
        if rank < factory {
            t.factory = true;
            t.tourcoing = rank < tourcoing;
            t.in_year = if rank < tourcoing { rank < in_year } else { rng.random_bool(0.25) };
            t.no_location = false;
            t.no_date = false;
        } else {
            t.tourcoing = rng.random_bool(0.20);
            t.in_year = rng.random_bool(0.25);
            t.no_location = rng.random_bool(0.10);
            t.no_date = rng.random_bool(0.05);
        }
    }
    traits
}

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[&'a str]) -> &'a str {
    items[rng.random_range(0..items.len())]
}

fn title(rng: &mut ChaCha8Rng, factory: bool, serial: usize) -> String {
    let base = if factory { pick(rng, &FACTORY_TITLES) } else { pick(rng, &OTHER_TITLES) };
    format!("{base} {} n° {serial}", pick(rng, &OWNERS))
}

fn town(rng: &mut ChaCha8Rng, t: Traits) -> Option<String> {
    if t.no_location {
        None
    } else if t.tourcoing {
        Some(TOURCOING.to_owned())
    } else {
        Some(pick(rng, &OTHER_TOWNS).to_owned())
    }
}

fn year(rng: &mut ChaCha8Rng, t: Traits) -> i32 {
    if t.in_year {
        QUERY_YEAR
    } else {
        let y = rng.random_range(1995..2019);
        if y >= QUERY_YEAR {
            y + 1
        } else {
            y
        }
    }
}

fn day(rng: &mut ChaCha8Rng, year: i32) -> String {
    format!("{year}-{:02}-{:02}", rng.random_range(1..=12), rng.random_range(1..=28))
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn keywords(rng: &mut ChaCha8Rng) -> Vec<&'static str> {
    let mut k: Vec<&str> = KEYWORDS.to_vec();
    k.shuffle(rng);
    k.truncate(rng.random_range(1..=3));
    k
}

fn authors(rng: &mut ChaCha8Rng) -> Vec<&'static str> {
    let mut a: Vec<&str> = AUTHORS.to_vec();
    a.shuffle(rng);
    a.truncate(rng.random_range(1..=3));
    a
}

fn inventory_notice(rng: &mut ChaCha8Rng, id: &str, serial: usize, t: Traits) -> String {
    let mut x = String::new();
    let _ = writeln!(x, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(x, "<notice id=\"{id}\">");
    let _ = writeln!(x, "  <title>{}</title>", xml_escape(&title(rng, t.factory, serial)));
    let _ = writeln!(x, "  <authors>");
    for a in authors(rng) {
        let _ = writeln!(x, "    <author>{}</author>", xml_escape(a));
    }
    let _ = writeln!(x, "  </authors>");
    let _ = writeln!(x, "  <description>Notice d'inventaire du patrimoine industriel.</description>");
    let _ = writeln!(x, "  <keywords>");
    for k in keywords(rng) {
        let _ = writeln!(x, "    <keyword>{}</keyword>", xml_escape(k));
    }
    let _ = writeln!(x, "  </keywords>");
    let deposit_year = year(rng, t);
    let epoch = pick(rng, &EPOCHS);
    if !t.no_date {
        let _ = writeln!(x, "  <dates>");
        let _ = writeln!(x, "    <epoch>{}</epoch>", xml_escape(epoch));
        let _ = writeln!(x, "    <deposit>{}</deposit>", day(rng, deposit_year));
        if rng.random_bool(0.5) {
            let update_year = deposit_year + rng.random_range(1..5);
            let _ = writeln!(x, "    <update>{}</update>", day(rng, update_year));
        }
        let _ = writeln!(x, "  </dates>");
    }
    if let Some(town) = town(rng, t) {
        let _ = writeln!(x, "  <location>");
        let _ = writeln!(x, "    <address>{}</address>", xml_escape(&town));
        let _ = writeln!(x, "    <info>{} {}</info>", rng.random_range(1..200), xml_escape(pick(rng, &STREETS)));
        let _ = writeln!(x, "    <reference>cadastre {}{}</reference>", ["AB", "BK", "CE", "DH"][rng.random_range(0..4)], rng.random_range(1..900));
        let _ = writeln!(x, "  </location>");
    }
    let property = ["propriété privée", "propriété de la commune", "propriété d'une société privée"][rng.random_range(0..3)];
    let _ = writeln!(x, "  <property>{}</property>", xml_escape(property));
    let _ = writeln!(x, "  <link>https://inventaire.example.org/notice/{id}</link>");
    let _ = writeln!(x, "</notice>");
    x
}

fn press_dossier(rng: &mut ChaCha8Rng, id: &str, serial: usize) -> String {
    let mut x = String::new();
    let _ = writeln!(x, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(x, "<dossier id=\"{id}\">");
    let _ = writeln!(x, "  <title>La Voix du Nord : dossier industrie textile n° {serial}</title>");
    let _ = writeln!(x, "  <description>Articles de presse sur l'industrie textile de la métropole lilloise.</description>");
    let _ = writeln!(x, "  <date>{}</date>", day(rng, 2012));
    let _ = writeln!(x, "  <location>");
    let _ = writeln!(x, "    <address>Lille</address>");
    let _ = writeln!(x, "  </location>");
    let _ = writeln!(x, "  <language>fre</language>");
    for n in 1..=ARTICLES_PER_DOSSIER {
        let _ = writeln!(x, "  <article n=\"{n}\">");
        let _ = writeln!(x, "    <headline>{} ({n})</headline>", xml_escape(pick(rng, &HEADLINES)));
        let article_year = rng.random_range(1990..2015);
        let _ = writeln!(x, "    <date>{}</date>", day(rng, article_year));
        let _ = writeln!(x, "  </article>");
    }
    let _ = writeln!(x, "</dossier>");
    x
}

/// Smallest well-formed JFIF stream: SOI, APP0, a comment, EOI.
fn jpeg_bytes(comment: &str) -> Vec<u8> {
    let mut b = vec![0xFF, 0xD8];
    b.extend_from_slice(&[0xFF, 0xE0, 0x00, 0x10]);
    b.extend_from_slice(b"JFIF\0");
    b.extend_from_slice(&[0x01, 0x01, 0x00, 0x00, 0x01, 0x00, 0x01, 0x00, 0x00]);
    let len = (comment.len() + 2) as u16;
    b.extend_from_slice(&[0xFF, 0xFE]);
    b.extend_from_slice(&len.to_be_bytes());
    b.extend_from_slice(comment.as_bytes());
    b.extend_from_slice(&[0xFF, 0xD9]);
    b
}

fn json_bytes(value: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("json");
    out.push(b'\n');
    out
}

fn picture_sidecar(rng: &mut ChaCha8Rng, serial: usize, t: Traits) -> Value {
    let mut dc = Map::new();
    dc.insert("dc:title".into(), json!(title(rng, t.factory, serial)));
    dc.insert("dc:creator".into(), json!(authors(rng)));
    dc.insert("dc:subject".into(), json!(keywords(rng).join(", ")));
    dc.insert("dc:identifier".into(), json!(format!("PH-{:05}", serial)));
    dc.insert("dc:source".into(), json!("Fonds IRHIS, Université de Lille"));
    dc.insert("dc:type".into(), json!("image"));
    dc.insert("dc:format".into(), json!("image/jpeg"));
    let y = year(rng, t);
    if !t.no_date {
        dc.insert("dc:date".into(), json!(day(rng, y)));
    }
    if let Some(town) = town(rng, t) {
        dc.insert("dc:coverage".into(), json!(town));
    }
    Value::Object(dc)
}

/// Reference book record `00000C842_001`, always the first generated book.
pub fn sample_book_record() -> Value {
    json!({
        "dc:relation": "http://www.sudoc.fr/122661389",
        "dc:creator": [
            "Petit, Jules",
            "Chambre de commerce et d'industrie (Boulogne-sur-Mer, Pas-de-Calais).",
            "Commission du projet de chemin de fer direct de Calais a Marseille"
        ],
        "dc:subject": "Calais-Marseille, Chemin de fer (France).",
        "dc:publisher": "Villeneuve d'Ascq : SCD Lille 3",
        "dc:date": "[2008]",
        "dc:format": "application/pdf",
        "dc:language": "fre",
        "dc:rights": "domaine public",
        "dc:title": "Projet de chemin de fer de Calais a Marseille rapport fait a la Chambre de commerce de Boulogne, le 25 novembre 1881",
        "dc:type": "text",
        "dc:source": "Bibliotheque Georges Lefebvre"
    })
}

pub const SAMPLE_BOOK_ID: &str = "00000C842_001";

fn book_record(rng: &mut ChaCha8Rng, serial: usize, t: Traits) -> Value {
    let mut dc = Map::new();
    dc.insert("dc:title".into(), json!(title(rng, t.factory, serial)));
    dc.insert("dc:creator".into(), json!(authors(rng)));
    dc.insert("dc:subject".into(), json!(format!("{}.", keywords(rng).join(", "))));
    dc.insert("dc:publisher".into(), json!(["Villeneuve d'Ascq : SCD Lille 3", "Lille : Danel", "Roubaix : Impr. Reboux"][rng.random_range(0..3)]));
    dc.insert("dc:rights".into(), json!("domaine public"));
    dc.insert("dc:language".into(), json!("fre"));
    dc.insert("dc:format".into(), json!("application/pdf"));
    dc.insert("dc:type".into(), json!("text"));
    dc.insert("dc:source".into(), json!("Bibliotheque Georges Lefebvre"));
    dc.insert("dc:relation".into(), json!(format!("http://www.sudoc.fr/{:09}", rng.random_range(100_000_000..1_000_000_000u32))));
    let y = year(rng, t);
    if !t.no_date {
        let date = if rng.random_bool(0.5) { format!("[{y}]") } else { y.to_string() };
        dc.insert("dc:date".into(), json!(date));
    }
    if let Some(town) = town(rng, t) {
        dc.insert("dc:coverage".into(), json!(town));
    }
    Value::Object(dc)
}

pub fn generate_scaled_corpus(scale: usize, seed: u64) -> GeneratedCorpus {
    assert!(scale >= 1, "scale must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut files = BTreeMap::new();
    let mut serial = 0usize;
    let mut next = || {
        serial += 1;
        serial
    };

    for (i, t) in assign_traits(&mut rng, INVENTORY_PER_SCALE * scale).into_iter().enumerate() {
        let id = format!("IA59{:06}", i + 1);
        let xml = inventory_notice(&mut rng, &id, next(), t);
        files.insert(format!("inventory/{id}.xml"), xml.into_bytes());
    }
    for i in 0..PRESS_FILES_PER_SCALE * scale {
        let id = format!("voixdunord_{:03}", i + 1);
        files.insert(format!("voixdunord/{id}.xml"), press_dossier(&mut rng, &id, next()).into_bytes());
    }
    for (i, t) in assign_traits(&mut rng, PICTURES_PER_SCALE * scale).into_iter().enumerate() {
        let id = format!("IRHIS_{:05}", i + 1);
        let n = next();
        files.insert(format!("irhis/{id}.jpg"), jpeg_bytes(&id));
        let lacks_sidecar = !t.factory && rng.random_bool(0.2);
        if !lacks_sidecar {
            files.insert(format!("irhis/{id}.json"), json_bytes(&picture_sidecar(&mut rng, n, t)));
        }
    }
    // The first book is the reference record; quotas apply to the rest.
    files.insert(format!("books/{SAMPLE_BOOK_ID}.json"), json_bytes(&sample_book_record()));
    for (i, t) in assign_traits(&mut rng, BOOKS_PER_SCALE * scale - 1).into_iter().enumerate() {
        let id = format!("{:05}C{:03}_001", i + 1, rng.random_range(100..1000));
        files.insert(format!("books/{id}.json"), json_bytes(&book_record(&mut rng, next(), t)));
    }

    let manifest = format!(
        "# kind path expected-instances\ninventory inventory {}\nvoixdunord voixdunord {}\nirhis irhis {}\nbook books {}\n",
        INVENTORY_PER_SCALE * scale,
        PRESS_FILES_PER_SCALE * ARTICLES_PER_DOSSIER * scale,
        PICTURES_PER_SCALE * scale,
        BOOKS_PER_SCALE * scale,
    );
    files.insert(MANIFEST_FILE.to_owned(), manifest.into_bytes());
    GeneratedCorpus { scale, seed, files }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_scale_exactly() {
        for scale in [1, 3] {
            let c = generate_scaled_corpus(scale, 7);
            let count = |dir: &str, ext: &str| c.files.keys().filter(|k| k.starts_with(dir) && k.ends_with(ext)).count();
            assert_eq!(count("inventory/", ".xml"), 49 * scale);
            assert_eq!(count("voixdunord/", ".xml"), scale);
            assert_eq!(count("irhis/", ".jpg"), 30 * scale);
            assert_eq!(count("books/", ".json"), 165 * scale);
            assert_eq!(c.expected_documents(), 245 * scale);
            assert_eq!(c.expected_instances(), 274 * scale);
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        assert_eq!(generate_scaled_corpus(2, 9), generate_scaled_corpus(2, 9));
        assert_ne!(generate_scaled_corpus(1, 9).files, generate_scaled_corpus(1, 10).files);
    }

    #[test]
    fn quotas_are_nested() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = assign_traits(&mut rng, 164);
        let factory = t.iter().filter(|t| t.factory).count();
        let ft = t.iter().filter(|t| t.factory && t.tourcoing).count();
        let fty = t.iter().filter(|t| t.factory && t.tourcoing && t.in_year).count();
        assert_eq!((factory, ft, fty), (33, 13, 7));
        assert!(t.iter().filter(|t| t.factory).all(|t| !t.no_location && !t.no_date));
    }

    #[test]
    fn jpeg_magic() {
        assert!(jpeg_bytes("x").starts_with(&[0xFF, 0xD8, 0xFF]));
        assert!(jpeg_bytes("x").ends_with(&[0xFF, 0xD9]));
    }
}
