//! Regenerate the small dataset under `tests/fixtures/dataset`.
//!
//! ```text
//! cargo run -p urbanlens --example make_fixture [out_dir]
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use urbanlens::color::{PixelImage, RgbPixel};
use urbanlens::pipeline::io::{save_image, save_mask};
use urbanlens::segstat::ClassMask;

const W: u32 = 16;
const H: u32 = 12;

const SKY: u8 = 0;
const WALL: u8 = 3;
const BUILDING: u8 = 4;
const TREE: u8 = 9;
const SIGN: u8 = 6;
const VEHICLE: u8 = 16;
const ARTWORK: u8 = 22;

/// Tiny deterministic jitter so images are not flat.
fn jitter(seed: u32, i: u32) -> i16 {
    let x = seed.wrapping_mul(2_654_435_761).wrapping_add(i.wrapping_mul(40_503));
    ((x >> 13) % 9) as i16 - 4
}

fn shade(c: [u8; 3], seed: u32, i: u32) -> RgbPixel {
    let j = jitter(seed, i);
    let f = |v: u8| (v as i16 + j).clamp(0, 255) as u8;
    RgbPixel::new(f(c[0]), f(c[1]), f(c[2]))
}

struct Scene {
    sky: [u8; 3],
    facade: [u8; 3],
    wall: [u8; 3],
    tree: [u8; 3],
    ground: [u8; 3],
    accent: [u8; 3],
    accent_class: u8,
}

/// Rows 0-2 sky, 3-7 facade (left building, right wall), 8-9 tree/accent,
/// 10-11 ground (vehicles on the left).
fn render(scene: &Scene, seed: u32) -> (PixelImage, ClassMask) {
    let mut px = Vec::new();
    let mut idx = Vec::new();
    for y in 0..H {
        for x in 0..W {
            let i = y * W + x;
            let (color, class) = match y {
                0..=2 => (scene.sky, SKY),
                3..=7 if x < 10 => (scene.facade, BUILDING),
                3..=7 => (scene.wall, WALL),
                8..=9 if x < 6 => (scene.tree, TREE),
                8..=9 if x < 9 => (scene.accent, scene.accent_class),
                8..=9 => (scene.facade, BUILDING),
                _ if x < 7 => (scene.ground, VEHICLE),
                _ => (scene.ground, SKY),
            };
            px.push(shade(color, seed, i));
            idx.push(class);
        }
    }
    (
        PixelImage::new(W, H, px).unwrap(),
        ClassMask::new(W, H, idx).unwrap(),
    )
}

fn write_pair(dir: &Path, source: &str, stem: &str, scene: &Scene, seed: u32) {
    let (img, mask) = render(scene, seed);
    save_image(&img, &dir.join(source).join(format!("{stem}.png"))).unwrap();
    save_mask(&mask, &dir.join("masks").join(format!("{stem}.mask.png"))).unwrap();
}

fn quarter(root: &Path, name: &str, photo: [Scene; 3], street: [Scene; 3], reviews: &[(&str, &str)]) {
    let dir = root.join(name);
    for sub in ["photos", "streetviews", "masks"] {
        fs::create_dir_all(dir.join(sub)).unwrap();
    }
    for (i, s) in photo.iter().enumerate() {
        write_pair(&dir, "photos", &format!("p{}", i + 1), s, 10 + i as u32);
    }
    for (i, s) in street.iter().enumerate() {
        write_pair(&dir, "streetviews", &format!("s{}", i + 1), s, 20 + i as u32);
    }
    let lines: String = reviews
        .iter()
        .map(|(id, text)| {
            serde_json::json!({"id": id, "quarter": name, "text": text}).to_string() + "\n"
        })
        .collect();
    fs::write(dir.join("reviews.jsonl"), lines).unwrap();
}

fn main() {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/dataset"));
    if out.exists() {
        fs::remove_dir_all(&out).unwrap();
    }

    // Photos lean saturated and cool; street views lean gray and warm.
    let bund_photo = |facade: [u8; 3]| Scene {
        sky: [70, 130, 230],
        facade,
        wall: [200, 190, 170],
        tree: [40, 170, 70],
        ground: [60, 60, 70],
        accent: [230, 60, 40],
        accent_class: SIGN,
    };
    let bund_street = |facade: [u8; 3]| Scene {
        sky: [170, 180, 190],
        facade,
        wall: [185, 170, 150],
        tree: [90, 120, 80],
        ground: [110, 105, 100],
        accent: [150, 90, 70],
        accent_class: SIGN,
    };
    quarter(
        &out,
        "bund",
        [
            bund_photo([210, 180, 140]),
            bund_photo([90, 140, 200]),
            bund_photo([220, 200, 160]),
        ],
        [
            bund_street([180, 150, 120]),
            bund_street([170, 160, 140]),
            bund_street([160, 130, 110]),
        ],
        &[
            ("b1", "来步行街了，打卡成功！但街道有点脏乱差，而且说实话没啥太多的餐饮选择"),
            ("b2", "人太多了 容易发生踩踏事件 不过景色真的很漂亮 建筑群超好看"),
            ("b3", "上厕所，排很长的队"),
            ("b4", "It was overcrowded and felt unsafe, but the view was stunning and the architecture was impressive."),
        ],
    );

    let yuyuan_photo = |facade: [u8; 3]| Scene {
        sky: [60, 150, 220],
        facade,
        wall: [120, 40, 30],
        tree: [30, 160, 90],
        ground: [80, 70, 60],
        accent: [240, 200, 40],
        accent_class: ARTWORK,
    };
    let yuyuan_street = |facade: [u8; 3]| Scene {
        sky: [190, 195, 200],
        facade,
        wall: [130, 70, 60],
        tree: [80, 110, 70],
        ground: [120, 115, 110],
        accent: [170, 150, 90],
        accent_class: ARTWORK,
    };
    quarter(
        &out,
        "yuyuan",
        [
            yuyuan_photo([160, 40, 30]),
            yuyuan_photo([60, 60, 60]),
            yuyuan_photo([200, 60, 40]),
        ],
        [
            yuyuan_street([140, 70, 50]),
            yuyuan_street([90, 85, 80]),
            yuyuan_street([150, 80, 60]),
        ],
        &[
            ("y1", "到处是人，今年的灯会还是不错的。小吃价格太贵，关键不好吃，建议不要在豫园里消费。"),
            ("y2", "很商业化了，没什么意思里面很小，没什么可逛的挺没必要花门票进去的。"),
            ("y3", "环境很干净，公交也方便"),
            ("y4", "Visited the pedestrian street—check! But honestly, the street was a bit dirty and lacked dining options."),
        ],
    );
    println!("wrote {}", out.display());
}
