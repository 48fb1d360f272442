"""Regenerate the packaged dataset manifests and the benchmark-table fixture.

Run from the repo root: python tools/make_fixtures.py
Verifies the transcribed per-row means before writing anything.
"""
import csv
import json
from pathlib import Path

FIXTURE_ROOT = Path(__file__).resolve().parents[1] / "src" / "embeval" / "fixtures"

CIFAR10 = [
    "airplane", "automobile", "bird", "cat", "deer",
    "dog", "frog", "horse", "ship", "truck",
]

CIFAR100 = [
    "apple", "aquarium_fish", "baby", "bear", "beaver", "bed", "bee", "beetle",
    "bicycle", "bottle", "bowl", "boy", "bridge", "bus", "butterfly", "camel",
    "can", "castle", "caterpillar", "cattle", "chair", "chimpanzee", "clock",
    "cloud", "cockroach", "couch", "crab", "crocodile", "cup", "dinosaur",
    "dolphin", "elephant", "flatfish", "forest", "fox", "girl", "hamster",
    "house", "kangaroo", "keyboard", "lamp", "lawn_mower", "leopard", "lion",
    "lizard", "lobster", "man", "maple_tree", "motorcycle", "mountain", "mouse",
    "mushroom", "oak_tree", "orange", "orchid", "otter", "palm_tree", "pear",
    "pickup_truck", "pine_tree", "plain", "plate", "poppy", "porcupine",
    "possum", "rabbit", "raccoon", "ray", "road", "rocket", "rose", "sea",
    "seal", "shark", "shrew", "skunk", "skyscraper", "snail", "snake", "spider",
    "squirrel", "streetcar", "sunflower", "sweet_pepper", "table", "tank",
    "telephone", "television", "tiger", "tractor", "train", "trout", "tulip",
    "turtle", "wardrobe", "whale", "willow_tree", "wolf", "woman", "worm",
]

VOC2007 = [
    "aeroplane", "bicycle", "bird", "boat", "bottle", "bus", "car", "cat",
    "chair", "cow", "diningtable", "dog", "horse", "motorbike", "person",
    "pottedplant", "sheep", "sofa", "train", "tvmonitor",
]

OXFORD_PETS = [
    "Abyssinian", "american bulldog", "american pit bull terrier",
    "basset hound", "beagle", "Bengal", "Birman", "Bombay", "boxer",
    "British Shorthair", "chihuahua", "Egyptian Mau", "english cocker spaniel",
    "english setter", "german shorthaired", "great pyrenees", "havanese",
    "japanese chin", "keeshond", "leonberger", "Maine Coon",
    "miniature pinscher", "newfoundland", "Persian", "pomeranian", "pug",
    "Ragdoll", "Russian Blue", "saint bernard", "samoyed", "scottish terrier",
    "shiba inu", "Siamese", "Sphynx", "staffordshire bull terrier",
    "wheaten terrier", "yorkshire terrier",
]

EUROSAT = [
    "AnnualCrop", "Forest", "HerbaceousVegetation", "Highway", "Industrial",
    "Pasture", "PermanentCrop", "Residential", "River", "SeaLake",
]

DTD = [
    "banded", "blotchy", "braided", "bubbly", "bumpy", "chequered",
    "cobwebbed", "cracked", "crosshatched", "crystalline", "dotted", "fibrous",
    "flecked", "freckled", "frilly", "gauzy", "grid", "grooved", "honeycombed",
    "interlaced", "knitted", "lacelike", "lined", "marbled", "matted",
    "meshed", "paisley", "perforated", "pitted", "pleated", "polka-dotted",
    "porous", "potholed", "scaly", "smeared", "spiralled", "sprinkled",
    "stained", "stratified", "striped", "studded", "swirly", "veined",
    "waffled", "woven", "wrinkled", "zigzagged",
]

RESISC45 = [
    "airplane", "airport", "baseball_diamond", "basketball_court", "beach",
    "bridge", "chaparral", "church", "circular_farmland", "cloud",
    "commercial_area", "dense_residential", "desert", "forest", "freeway",
    "golf_course", "ground_track_field", "harbor", "industrial_area",
    "intersection", "island", "lake", "meadow", "medium_residential",
    "mobile_home_park", "mountain", "overpass", "palace", "parking_lot",
    "railway", "railway_station", "rectangular_farmland", "river",
    "roundabout", "runway", "sea_ice", "ship", "snowberg",
    "sparse_residential", "stadium", "storage_tank", "tennis_court",
    "terrace", "thermal_power_station", "wetland",
]


def placeholders(slug: str, count: int) -> list[str]:
    return [f"{slug} category {i:04d}" for i in range(count)]


MANIFESTS = [
    # slug, name, group, categories, template, metric, validation size
    ("imagenet_1k", "ImageNet-1K", "common", placeholders("imagenet_1k", 1000),
     "a photo of a {}.", "accuracy", 50000),
    ("cifar10", "CIFAR-10", "common", CIFAR10,
     "a black and white photo of the {}.", "accuracy", 10000),
    ("cifar100", "CIFAR-100", "common", CIFAR100,
     "a photo of a {}.", "accuracy", 10000),
    ("caltech101", "Caltech-101", "common", placeholders("caltech101", 101),
     "a photo of a {}.", "mean_per_class", 6085),
    ("voc2007", "VOC-2007", "common", VOC2007,
     "a photo of a {}.", "map_11pt", 4952),
    ("mnist", "MNIST", "common", [str(d) for d in range(10)],
     'a photo of the number: "{}".', "accuracy", 10000),
    ("sun397", "SUN-397", "common", placeholders("sun397", 397),
     "a photo of a {}.", "accuracy", 19850),
    ("food101", "Food-101", "fine_grained", placeholders("food101", 101),
     "a photo of {}, a type of food.", "accuracy", 25250),
    ("oxford_pets", "Oxford-IIIT Pets", "fine_grained", OXFORD_PETS,
     "a photo of a {}, a type of pet.", "mean_per_class", 3669),
    ("oxford_flowers", "Oxford Flowers", "fine_grained", placeholders("oxford_flowers", 102),
     "a photo of a {}, a type of flower.", "mean_per_class", 6149),
    ("stanford_cars", "Stanford Cars", "fine_grained", placeholders("stanford_cars", 196),
     "a photo of my old {}.", "accuracy", 8041),
    ("fgvc_aircraft", "FGVC Aircraft", "fine_grained", placeholders("fgvc_aircraft", 100),
     "a photo of a {}, a type of aircraft.", "mean_per_class", 3333),
    ("country211", "Country-211", "fine_grained", placeholders("country211", 211),
     "a photo i took in {}.", "accuracy", 21100),
    ("patch_camelyon", "PatchCamelyon", "rare",
     ["lymph node", "lymph node containing metastatic tumor tissue"],
     "this is a photo of {}.", "accuracy", 32768),
    ("eurosat", "EuroSAT", "rare", EUROSAT,
     "a centered satellite photo of {}.", "accuracy", 5000),
    ("gtsrb", "GTSRB", "rare", placeholders("gtsrb", 43),
     "a close up photo of a {}, a traffic sign.", "accuracy", 12630),
    ("rendered_sst2", "Rendered-SST2", "rare", ["negative", "positive"],
     "a {} review of a movie.", "accuracy", 1821),
    ("fer2013", "FER-2013", "rare", ["negative emotion", "positive emotion"],
     "a photo of a {} looking face.", "accuracy", 3574),
    ("resisc45", "RESISC-45", "rare", RESISC45,
     "satellite imagery of {}.", "accuracy", 25200),
    ("hateful_memes", "Hateful Memes", "rare", ["meme", "hatespeech meme"],
     "a {}.", "roc_auc", 500),
    ("describable_textures", "Describable Textures", "rare", DTD,
     "a photo of a {} texture.", "accuracy", 1880),
    ("kitti_distance", "KITTI Distance", "rare",
     ["car on my left or right side", "car nearby", "car in the distance", "no car"],
     "a photo i took with a {}.", "accuracy", 711),
]

EXPECTED_COUNTS = {
    "imagenet_1k": 1000, "cifar10": 10, "cifar100": 100, "caltech101": 101,
    "voc2007": 20, "mnist": 10, "sun397": 397, "food101": 101,
    "oxford_pets": 37, "oxford_flowers": 102, "stanford_cars": 196,
    "fgvc_aircraft": 100, "country211": 211, "patch_camelyon": 2,
    "eurosat": 10, "gtsrb": 43, "rendered_sst2": 2, "fer2013": 2,
    "resisc45": 45, "hateful_memes": 2, "describable_textures": 47,
    "kitti_distance": 4,
}

TABLE_DATASETS = [
    "ImageNet-1K", "Caltech-101", "CIFAR-10", "CIFAR-100", "Country-211",
    "Describable Textures", "EuroSAT", "FER-2013", "FGVC Aircraft",
    "Food-101", "GTSRB", "Hateful Memes", "KITTI Distance", "MNIST",
    "Oxford Flowers", "Oxford-IIIT Pets", "PatchCamelyon", "Rendered-SST2",
    "RESISC-45", "Stanford Cars", "SUN-397", "VOC-2007",
]

TABLE_ROWS = [
    ("GLIDE", "ST",
     [43.66, 78.75, 85.70, 45.54, 11.07, 22.07, 51.36, 35.30, 15.86, 71.33,
      18.05, 58.61, 37.27, 18.98, 62.23, 64.24, 62.53, 52.94, 49.52, 51.20,
      49.95, 80.34], 48.48),
    ("GLIDE", "CE",
     [57.35, 81.35, 82.35, 47.83, 10.16, 29.84, 40.48, 22.82, 13.35, 70.74,
      10.48, 51.87, 43.32, 16.29, 49.15, 56.89, 61.98, 54.97, 48.87, 45.27,
      58.57, 78.62], 46.93),
    ("GLIDE", "DT",
     [57.55, 85.38, 88.64, 57.64, 13.17, 36.38, 41.64, 23.79, 18.96, 79.58,
      17.75, 54.62, 40.79, 15.91, 65.66, 83.96, 58.36, 55.57, 54.87, 54.33,
      58.56, 81.73], 52.04),
    ("StableDiffusion", "ST",
     [47.90, 85.79, 85.20, 58.63, 13.34, 38.14, 48.42, 19.17, 15.09, 82.39,
      20.99, 46.05, 8.30, 19.80, 64.87, 77.41, 51.72, 47.83, 51.31, 58.35,
      54.35, 79.20], 48.83),
    ("StableDiffusion", "CE",
     [60.04, 81.30, 88.22, 56.09, 11.27, 30.69, 50.00, 29.81, 13.24, 73.95,
      8.73, 50.67, 24.47, 22.15, 45.95, 57.01, 54.70, 50.58, 49.15, 54.11,
      55.90, 80.97], 47.68),
    ("StableDiffusion", "DT",
     [61.07, 86.31, 88.90, 60.19, 13.85, 46.12, 40.72, 27.81, 16.30, 82.29,
      30.09, 49.02, 9.14, 19.70, 66.13, 83.36, 53.09, 50.08, 52.73, 58.45,
      57.48, 82.35], 51.60),
    ("StableDiffusion", "NP",
     [60.19, 86.70, 89.43, 62.95, 14.25, 44.36, 35.70, 28.11, 15.95, 81.64,
      22.03, 44.75, 22.08, 17.49, 63.31, 80.87, 50.54, 53.27, 52.34, 58.41,
      57.55, 82.32], 51.10),
    ("StableDiffusion", "NP+RD",
     [61.45, 87.26, 89.22, 64.90, 14.14, 45.69, 27.94, 27.42, 15.23, 80.99,
      22.03, 43.30, 37.27, 26.22, 64.89, 80.10, 53.04, 55.41, 50.83, 57.29,
      57.43, 82.16], 52.01),
]


def main() -> None:
    manifest_dir = FIXTURE_ROOT / "manifests"
    manifest_dir.mkdir(parents=True, exist_ok=True)
    for slug, name, group, cats, template, metric, val_size in MANIFESTS:
        assert len(cats) == EXPECTED_COUNTS[slug], (slug, len(cats))
        assert len(set(cats)) == len(cats), f"duplicate categories in {slug}"
        blob = {
            "name": name,
            "concept_group": group,
            "categories": cats,
            "defined_template": template,
            "metric_kind": metric,
            "validation_size": val_size,
        }
        path = manifest_dir / f"{slug}.json"
        path.write_text(json.dumps(blob, indent=2, ensure_ascii=False) + "\n", "utf-8")
    total = sum(EXPECTED_COUNTS.values())
    print(f"wrote {len(MANIFESTS)} manifests, {total} categories total")
    common = sum(EXPECTED_COUNTS[s] for s in
                 ("imagenet_1k", "cifar10", "cifar100", "caltech101", "voc2007", "mnist", "sun397"))
    print(f"common-group categories: {common}")

    rows = []
    for model, strategy, values, printed_mean in TABLE_ROWS:
        assert len(values) == 22, (model, strategy, len(values))
        mean = sum(values) / len(values)
        assert abs(mean - printed_mean) <= 0.01, (model, strategy, mean, printed_mean)
        print(f"{model:16s} {strategy:6s} mean {mean:8.4f} (printed {printed_mean})")
        for ds, v in zip(TABLE_DATASETS, values):
            rows.append([ds, model, strategy, "20", "cler", f"{v:.6f}", "", ""])

    with open(FIXTURE_ROOT / "table2.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["dataset", "model", "strategy", "shots", "metric", "value", "baseline", "delta"])
        writer.writerows(rows)
    print(f"wrote table2.csv with {len(rows)} records")


if __name__ == "__main__":
    main()
