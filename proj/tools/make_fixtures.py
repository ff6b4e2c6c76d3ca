#!/usr/bin/env python3
"""Regenerates the bundled fixtures under data/ from a fixed seed.

    python3 tools/make_fixtures.py [--data DIR]

Outputs: cars/ads.jsonl, cars/querylog.jsonl, cars/ws_corpus.txt,
cars/judgments.jsonl and classifier/questions.jsonl.
"""

import argparse
import json
import random
from pathlib import Path

SEED = 20120611

MODELS = {
    "Honda": ["Accord", "Civic", "Odyssey", "Pilot"],
    "Toyota": ["Camry", "Corolla", "Prius", "Tacoma"],
    "Ford": ["Focus", "Mustang", "Fusion", "Escape", "Explorer"],
    "Mazda": ["Miata", "Protege", "Tribute"],
    "BMW": ["328i", "X5"],
    "Chevy": ["Malibu", "Impala", "Cavalier", "Silverado"],
    "Nissan": ["Altima", "Sentra", "Maxima"],
    "Volkswagen": ["Jetta", "Passat", "Golf", "Beetle"],
    "Hyundai": ["Elantra", "Sonata"],
    "Subaru": ["Outback", "Forester", "Impreza"],
    "Dodge": ["Neon", "Charger", "Durango"],
    "Kia": ["Sorento", "Optima"],
    "Audi": ["A4"],
    "Jeep": ["Wrangler", "Cherokee"],
    "Buick": ["LeSabre", "Regal"],
}
COLORS = ["red", "blue", "black", "white", "silver", "grey", "green", "gold", "beige", "maroon",
          "yellow", "brown", "tan"]
TRANSMISSIONS = ["Automatic", "Automatic", "Automatic", "manual"]
DOORS = ["2 door", "2dr", "2-door", "4 door", "4dr", "4-door", "4 door", "4dr"]
DRIVETRAINS = ["front wheel drive", "front wheel drive", "2 wheel drive", "4 wheel drive",
               "all wheel drive", "rear wheel drive"]

# Records that questions and tests refer to by value.
FIXED_ADS = [
    ("C001", "Chevy", "Malibu", "blue", "Automatic", "4 door", "front wheel drive", 5899, 88000, 2004),
    ("C002", "Toyota", "Camry", "blue", "Automatic", "4dr", "front wheel drive", 8561, 64000, 2005),
    ("C003", "Ford", "Focus", "blue", "manual", "4-door", "front wheel drive", 6795, 71000, 2006),
    ("C004", "Honda", "Accord", "blue", "Automatic", "4 door", "2 wheel drive", 16536, 21000, 2009),
    ("C005", "Honda", "Accord", "gold", "Automatic", "4dr", "front wheel drive", 6600, 97000, 2003),
    ("C006", "BMW", "328i", "red", "manual", "2 door", "rear wheel drive", 12900, 45000, 2007),
    ("C007", "Mazda", "Miata", "red", "Automatic", "2dr", "rear wheel drive", 7400, 52000, 2004),
    ("C008", "Jeep", "Wrangler", "green", "manual", "2-door", "4 wheel drive", 11200, 18500, 2008),
    ("C009", "Toyota", "Tacoma", "silver", "Automatic", "4 door", "4 wheel drive", 14800, 19500, 2010),
    ("C010", "Ford", "Mustang", "black", "manual", "2 door", "rear wheel drive", 1500, 190000, 1985),
    ("C011", "Honda", "Civic", "silver", "Automatic", "4dr", "front wheel drive", 18900, 1200, 2011),
    ("C012", "Honda", "Accord", "silver", "Automatic", "4 door", "front wheel drive", 4900, 120000, 1999),
    ("C013", "Toyota", "Corolla", "white", "Automatic", "4dr", "front wheel drive", 3900, 135000, 1998),
    ("C014", "Honda", "Accord", "silver", "manual", "2 door", "front wheel drive", 3500, 150000, 1996),
    ("C015", "Mazda", "Protege", "black", "Automatic", "2dr", "front wheel drive", 2800, 140000, 2000),
]


def gen_ads(rng):
    rows = list(FIXED_ADS)
    makes = sorted(MODELS)
    for i in range(len(FIXED_ADS) + 1, 121):
        make = rng.choice(makes)
        model = rng.choice(MODELS[make])
        year = rng.randint(1988, 2010)
        age = 2011 - year
        mileage = max(2500, int(rng.gauss(12000 * age + 4000, 9000)))
        base = {"BMW": 30000, "Audi": 27000}.get(make, 21000)
        price = max(1800, int(base * (0.86 ** age) * rng.uniform(0.75, 1.2) / 10) * 10)
        rows.append((f"C{i:03d}", make, model, rng.choice(COLORS), rng.choice(TRANSMISSIONS),
                     rng.choice(DOORS), rng.choice(DRIVETRAINS), price, mileage, year))
    out = []
    for r in rows:
        rid, make, model, color, trans, doors, drive, price, mileage, year = r
        out.append({"id": rid, "values": {
            "Make": make, "Model": model, "Color": color, "Transmission": trans, "Doors": doors,
            "Drivetrain": drive, "Price": price, "Mileage": mileage, "Year": year}})
    return out


# Makes that shoppers commonly compare; rewrites in the log follow these.
RIVALS = [("Honda", "Toyota"), ("Honda", "Chevy"), ("Toyota", "Nissan"), ("Ford", "Chevy"),
          ("Honda", "Ford"), ("Mazda", "Toyota"), ("BMW", "Audi"), ("Subaru", "Jeep"),
          ("Accord", "Camry"), ("Accord", "Malibu"), ("Civic", "Corolla"), ("Focus", "Civic"),
          ("Camry", "Altima"), ("Accord", "Focus")]


def gen_querylog(rng, ads):
    by_value = {}
    for a in ads:
        by_value.setdefault(a["values"]["Make"].lower(), []).append(a["id"])
        by_value.setdefault(a["values"]["Model"].lower(), []).append(a["id"])
    sessions = []
    t = 1_300_000_000.0
    for u in range(60):
        a, b = rng.choice(RIVALS)
        if rng.random() < 0.5:
            a, b = b, a
        entries = []
        steps = [a, b] + ([rng.choice([a, b])] if rng.random() < 0.3 else [])
        for k, value in enumerate(steps):
            t += rng.uniform(20, 600) if k else rng.uniform(3600, 7200)
            extra = rng.choice(["", " automatic", " under 8000", " blue", " 4 door"])
            clicks = []
            pool = by_value.get(value.lower(), [])
            for _ in range(rng.randint(0, 2)):
                if pool:
                    clicks.append({"ad_id": rng.choice(pool), "rank_position": rng.randint(1, 10),
                                   "dwell_seconds": round(rng.uniform(5, 240), 1)})
            entries.append({"query_text": f"{value.lower()}{extra}", "timestamp": round(t, 1),
                            "clicked_ads": clicks})
        sessions.append({"user_id": f"u{u:03d}", "entries": entries})
    return sessions


WS_GROUPS = [
    ["blue", "navy", "gold", "silver", "grey", "black"],
    ["red", "maroon", "burgundy", "orange"],
    ["white", "beige", "tan", "cream"],
    ["green", "brown", "tan"],
    ["automatic", "tiptronic", "manual", "shift"],
    ["wheel", "drive", "awd", "4wd", "all", "front", "rear", "4"],
    ["door", "coupe", "sedan", "2", "4"],
]
FILLER = ["paint", "finish", "interior", "clean", "options", "condition", "exterior", "trim"]


def gen_ws_corpus(rng):
    lines = []
    for _ in range(220):
        g = rng.choice(WS_GROUPS)
        words = rng.sample(g, k=min(len(g), rng.randint(2, 4)))
        words += rng.sample(FILLER, k=2)
        rng.shuffle(words)
        lines.append(" ".join(words))
    return lines


JUDGED_QUESTIONS = [
    ("Find Honda Accord blue less than 15,000 dollars",
     {"Make": "honda", "Model": "accord", "Color": "blue"}, ("Price", "<", 15000)),
    ("red Mazda Miata under $7000", {"Make": "mazda", "Model": "miata", "Color": "red"},
     ("Price", "<", 7000)),
    ("silver Toyota automatic", {"Make": "toyota", "Color": "silver", "Transmission": "automatic"},
     None),
    ("black manual Ford under 10000 dollars",
     {"Make": "ford", "Color": "black", "Transmission": "manual"}, ("Price", "<", 10000)),
    ("Honda Civic with less than 60000 miles", {"Make": "honda", "Model": "civic"},
     ("Mileage", "<", 60000)),
    ("4 wheel drive Jeep newer than 2005", {"Make": "jeep", "Drivetrain": "4 wheel drive"},
     ("Year", ">", 2005)),
    ("white Toyota Corolla less than $5000",
     {"Make": "toyota", "Model": "corolla", "Color": "white"}, ("Price", "<", 5000)),
    ("blue Chevy Malibu automatic", {"Make": "chevy", "Model": "malibu", "Color": "blue",
                                     "Transmission": "automatic"}, None),
]

SIMILAR = {"honda": {"toyota", "chevy", "ford", "nissan"}, "accord": {"camry", "malibu", "focus"},
           "mazda": {"toyota"}, "miata": {"mustang"}, "toyota": {"honda", "nissan"},
           "ford": {"chevy"}, "civic": {"corolla", "focus"}, "jeep": {"subaru"},
           "corolla": {"civic"}, "chevy": {"ford", "honda"}, "malibu": {"accord", "camry"},
           "blue": {"silver", "grey", "black"}, "red": {"maroon"}, "silver": {"grey", "blue"},
           "white": {"beige", "tan"}, "black": {"grey", "blue"}}


def satisfied(ad, cats, num):
    v = ad["values"]
    sat = {k: v[k].lower() == want for k, want in cats.items()}
    if num:
        attr, op, x = num
        sat[attr] = v[attr] < x if op == "<" else v[attr] > x
    return sat


def gen_judgments(rng, ads):
    out = []
    for q, cats, num in JUDGED_QUESTIONS:
        n = len(cats) + (1 if num else 0)
        cands = []
        for ad in ads:
            sat = satisfied(ad, cats, num)
            misses = [k for k, ok in sat.items() if not ok]
            if len(misses) > 1:
                continue
            related = 1
            if misses:
                k = misses[0]
                val = ad["values"][k]
                if k in cats:
                    related = int(str(val).lower() in SIMILAR.get(cats[k], set()))
                else:
                    related = int(abs(val - num[2]) <= 0.25 * num[2])
            cands.append({"record_id": ad["id"], "related": related})
        rng.shuffle(cands)
        if len(cands) >= 5:
            out.append({"question": q, "conditions": n, "candidates": cands})
    return out


DOMAINS = {
    "cars": {
        "nouns": ["car", "sedan", "coupe", "truck", "suv", "vehicle", "convertible", "wagon"],
        "values": ["honda", "toyota", "ford", "mazda", "bmw", "accord", "camry", "civic", "corolla",
                   "mustang", "2dr", "4dr", "4 wheel drive", "automatic", "manual transmission",
                   "red", "blue", "silver", "sedan", "miata"],
        "numbers": ["less than 20k miles", "under $7000", "newer than 2005", "with low mileage",
                    "below 5000 dollars", "from 2004"],
        "superl": ["cheapest", "newest", "lowest mileage", "oldest"],
    },
    "motorcycles": {
        "nouns": ["motorcycle", "bike", "scooter", "dirt bike", "cruiser", "chopper"],
        "values": ["harley", "davidson", "yamaha", "kawasaki", "suzuki", "ducati", "ninja",
                   "sportster", "helmet", "saddlebags", "cc", "600cc", "1200cc", "touring"],
        "numbers": ["under $4000", "less than 10k miles", "newer than 2006", "over 750cc"],
        "superl": ["cheapest", "fastest", "newest", "lightest"],
    },
    "jobs": {
        "nouns": ["job", "position", "opening", "career", "internship", "role"],
        "values": ["nurse", "engineer", "teacher", "accountant", "full time", "part time",
                   "remote", "salary", "benefits", "entry level", "manager", "developer",
                   "hiring", "resume", "experience"],
        "numbers": ["paying over $50000", "at least 20 an hour", "with 2 years experience",
                    "more than 40 hours"],
        "superl": ["highest paying", "best paid", "closest"],
    },
    "rentals": {
        "nouns": ["apartment", "house", "condo", "studio", "townhouse", "room"],
        "values": ["bedroom", "bathroom", "furnished", "pets allowed", "lease", "rent",
                   "downtown", "utilities", "parking", "laundry", "2 bedroom", "balcony",
                   "landlord", "deposit"],
        "numbers": ["under $900 a month", "less than 1200 rent", "with 2 bathrooms",
                    "over 800 square feet"],
        "superl": ["cheapest", "largest", "nearest"],
    },
    "furniture": {
        "nouns": ["sofa", "couch", "table", "dresser", "chair", "bed frame", "bookshelf"],
        "values": ["oak", "leather", "sectional", "recliner", "mahogany", "queen", "king size",
                   "dining", "antique", "drawers", "cushions", "wooden", "upholstered", "ikea"],
        "numbers": ["under $300", "less than 6 feet", "with 4 drawers", "below 150 dollars"],
        "superl": ["cheapest", "biggest", "smallest"],
    },
    "electronics": {
        "nouns": ["laptop", "tv", "phone", "tablet", "camera", "monitor", "speaker"],
        "values": ["samsung", "apple", "iphone", "sony", "hdmi", "bluetooth", "wireless",
                   "ram", "ssd", "screen", "4k", "charger", "dell", "lcd", "pixels"],
        "numbers": ["under $500", "with 16gb ram", "at least 55 inch", "less than 2 years old"],
        "superl": ["cheapest", "newest", "largest screen"],
    },
    "pets": {
        "nouns": ["puppy", "kitten", "dog", "cat", "parrot", "rabbit", "hamster"],
        "values": ["labrador", "retriever", "poodle", "siamese", "vaccinated", "purebred",
                   "breeder", "adoption", "litter", "neutered", "spayed", "terrier", "beagle",
                   "trained", "kennel"],
        "numbers": ["under $400", "younger than 12 weeks", "less than 2 years old"],
        "superl": ["youngest", "cheapest", "smallest"],
    },
    "boats": {
        "nouns": ["boat", "sailboat", "kayak", "canoe", "yacht", "pontoon", "jet ski"],
        "values": ["outboard", "hull", "trailer", "fishing", "fiberglass", "mercury", "evinrude",
                   "deck", "sail", "mast", "marina", "anchor", "bass boat", "horsepower"],
        "numbers": ["under $15000", "less than 20 feet", "over 90 hp", "newer than 2000"],
        "superl": ["cheapest", "longest", "newest"],
    },
}
OPENERS = ["", "", "Do you have a", "I want a", "Looking for a", "Any", "Show me a", "I need a",
           "Is there a", "Find me a"]


def gen_questions(rng, per_domain=60):
    out = []
    for domain in sorted(DOMAINS):
        d = DOMAINS[domain]
        for _ in range(per_domain):
            parts = []
            if rng.random() < 0.3:
                parts.append(rng.choice(d["superl"]))
            parts += rng.sample(d["values"], k=rng.randint(1, 3))
            if rng.random() < 0.7:
                parts.append(rng.choice(d["nouns"]))
            if rng.random() < 0.5:
                parts.append(rng.choice(d["numbers"]))
            q = " ".join(p for p in [rng.choice(OPENERS)] + parts if p)
            out.append({"question": q, "domain": domain})
    rng.shuffle(out)
    return out


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--data", default=str(Path(__file__).resolve().parent.parent / "data"))
    args = ap.parse_args()
    data = Path(args.data)
    rng = random.Random(SEED)
    ads = gen_ads(rng)
    write_jsonl(data / "cars" / "ads.jsonl", ads)
    write_jsonl(data / "cars" / "querylog.jsonl", gen_querylog(rng, ads))
    (data / "cars" / "ws_corpus.txt").write_text("\n".join(gen_ws_corpus(rng)) + "\n")
    write_jsonl(data / "cars" / "judgments.jsonl", gen_judgments(rng, ads))
    write_jsonl(data / "classifier" / "questions.jsonl", gen_questions(rng))


if __name__ == "__main__":
    main()
