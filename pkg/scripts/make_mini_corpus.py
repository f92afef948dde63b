"""Regenerate the bundled mini corpus (50 documents, 20 queries) in BEIR layout.

Documents are assembled from per-domain sentence pools with a fixed seed, so the
output is stable.  Run from the repository root:

    python3 scripts/make_mini_corpus.py src/docexpand/data/mini
"""

import json
import random
import sys
from pathlib import Path

DOMAINS = {
    "nutrition": {
        "titles": ["Vitamin D and bone density", "Dietary fiber and gut bacteria", "Sodium intake and blood pressure",
                   "Omega-3 fatty acids in older adults", "Iron absorption from plant foods",
                   "Sugar-sweetened drinks and weight gain", "Protein timing after exercise",
                   "Calcium supplements and fracture risk", "Mediterranean diet and heart disease",
                   "Caffeine and sleep quality"],
        "sentences": [
            "Participants who took a daily supplement showed higher serum levels after twelve weeks.",
            "Fiber is fermented by colon bacteria into short-chain fatty acids.",
            "Reducing salt lowered systolic pressure in adults with hypertension.",
            "Fish oil capsules were associated with fewer cardiac events in the cohort.",
            "Vitamin C taken with a meal roughly doubled non-heme iron uptake.",
            "Children who drank soda every day gained more weight over two years.",
            "Muscle protein synthesis peaked when whey was consumed soon after training.",
            "The trial found no clear reduction in hip fractures among supplement users.",
            "Olive oil, legumes and vegetables form the core of the eating pattern.",
            "Coffee late in the afternoon delayed sleep onset by about forty minutes.",
            "Dietitians recommend whole grains over refined flour for most patients.",
            "Blood samples were analysed for vitamin and mineral concentrations.",
        ],
    },
    "energy": {
        "titles": ["Heat pumps in cold climates", "Lithium-ion battery degradation", "Offshore wind capacity factors",
                   "Rooftop solar and grid stability", "Green hydrogen from electrolysis",
                   "Smart meters and household demand", "Geothermal district heating",
                   "Perovskite solar cell efficiency", "Pumped hydro storage economics", "Electric vehicle charging peaks"],
        "sentences": [
            "Air-source heat pumps kept working efficiently at minus fifteen degrees.",
            "Battery capacity faded faster when cells were charged at high temperature.",
            "Turbines far from shore saw steadier winds and higher output.",
            "Inverters can support grid voltage when many rooftops export power at noon.",
            "Electrolysers split water into hydrogen using renewable electricity.",
            "Households shifted laundry to off-peak hours once prices were shown in real time.",
            "Hot water from deep wells supplies heat to thousands of apartments.",
            "Lab cells converted over a quarter of incoming sunlight into electricity.",
            "Reservoirs store energy by pumping water uphill when power is cheap.",
            "Evening charging of electric cars adds to the daily demand peak.",
            "Grid operators balance supply and demand every few seconds.",
            "The installation cost per kilowatt fell sharply over the decade.",
        ],
    },
    "work": {
        "titles": ["Remote work and productivity", "Four-day work week trials", "Open-plan offices and focus",
                   "Meeting overload in large firms", "Hybrid schedules and team cohesion",
                   "Commuting time and wellbeing", "Onboarding new hires remotely", "Employee burnout indicators",
                   "Flexible hours and retention", "Coworking spaces for freelancers"],
        "sentences": [
            "Employees working from home completed more calls per shift.",
            "Companies in the pilot kept output steady while cutting one working day.",
            "Open-plan layouts increased interruptions and reduced deep focus time.",
            "Managers spent nearly half of their week in scheduled meetings.",
            "Teams that met in person twice a week reported stronger trust.",
            "Long commutes were linked to lower life satisfaction and less exercise.",
            "New staff who had a remote mentor ramped up faster.",
            "Exhaustion and cynicism are early signs of burnout at work.",
            "Staff with flexible hours were less likely to quit within a year.",
            "Freelancers value shared desks for networking and routine.",
            "Surveys measured engagement before and after the policy change.",
            "Productivity was tracked using output per hour worked.",
        ],
    },
    "medicine": {
        "titles": ["Antibiotic resistance in hospitals", "Statins and muscle pain", "Influenza vaccine effectiveness",
                   "Aspirin for primary prevention", "Sepsis early warning scores", "Metformin beyond diabetes",
                   "Hand hygiene compliance", "Antiviral timing in influenza", "Beta blockers after heart attack",
                   "Probiotics and antibiotic diarrhea"],
        "sentences": [
            "Resistant strains of bacteria spread between wards through shared equipment.",
            "Muscle symptoms were reported equally often on statin and placebo.",
            "The seasonal vaccine reduced hospital admissions among older adults.",
            "Daily aspirin raised bleeding risk without lowering mortality in healthy people.",
            "Early warning scores flagged deteriorating patients hours before sepsis was diagnosed.",
            "Metformin users had lower cancer incidence in observational data.",
            "Alcohol hand rub stations at bedsides improved hygiene compliance.",
            "Starting antivirals within two days shortened illness duration.",
            "Beta blockers lowered the rate of repeat heart attacks in the first year.",
            "Probiotic yogurt reduced diarrhea in children on antibiotics.",
            "Randomized controlled trials compared the drug with placebo.",
            "Clinicians reviewed patient records for adverse events.",
        ],
    },
    "materials": {
        "titles": ["Graphene thermal conductivity", "Self-healing polymers", "Concrete carbon emissions",
                   "Biodegradable plastics in seawater", "Shape memory alloys", "Corrosion of steel bridges",
                   "Aerogel insulation", "Recycled aluminium quality", "Ceramic coatings for turbines",
                   "Wood composites in tall buildings"],
        "sentences": [
            "Single-layer graphene conducts heat better than copper at room temperature.",
            "Microcapsules in the polymer release resin that seals cracks.",
            "Cement production releases large amounts of carbon dioxide.",
            "Bioplastic bags broke down slowly in cold seawater.",
            "Nickel-titanium wires return to their original shape when heated.",
            "Chloride from road salt accelerates corrosion of reinforcing steel.",
            "Aerogels trap air in a porous silica network with very low density.",
            "Remelted scrap aluminium matched primary metal in tensile strength.",
            "Thermal barrier coatings let turbine blades run hotter.",
            "Cross-laminated timber panels carry loads in multi-storey buildings.",
            "Samples were tested under tension until failure.",
            "Microscopy revealed the structure of the material surface.",
        ],
    },
}

QUERIES = [
    ("nutrition", 0, "does vitamin d improve bone strength"), ("nutrition", 2, "salt reduction effect on hypertension"),
    ("nutrition", 9, "coffee effect on sleep"), ("nutrition", 4, "how to absorb more iron from vegetables"),
    ("energy", 0, "heat pump performance in winter"), ("energy", 1, "why do batteries lose capacity"),
    ("energy", 4, "producing hydrogen with renewable power"), ("energy", 9, "electric car charging and grid load"),
    ("work", 0, "is working from home productive"), ("work", 1, "shorter work week results"),
    ("work", 7, "signs of burnout"), ("work", 5, "commute length and happiness"),
    ("medicine", 0, "superbugs spreading in hospitals"), ("medicine", 1, "do statins cause muscle aches"),
    ("medicine", 4, "predicting sepsis early"), ("medicine", 9, "probiotics during antibiotic treatment"),
    ("materials", 0, "graphene heat conduction"), ("materials", 2, "cement and co2 emissions"),
    ("materials", 5, "road salt corroding bridges"), ("materials", 9, "timber in high rise construction"),
]


def main(out: Path) -> None:
    rng = random.Random(20240101)
    docs, order = [], []
    for name, dom in DOMAINS.items():
        pool = dom["sentences"]
        for i, title in enumerate(dom["titles"]):
            # the matching sentence first, then a few domain sentences
            others = [s for j, s in enumerate(pool) if j != i]
            picked = [pool[i]] + rng.sample(others, 3)
            doc_id = f"{name[:3]}{i:02d}"
            docs.append({"_id": doc_id, "title": title, "text": " ".join(picked), "metadata": {}})
            order.append((name, i, doc_id))
    ids = {(n, i): d for n, i, d in order}
    (out / "qrels").mkdir(parents=True, exist_ok=True)
    with open(out / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for d in docs:
            fh.write(json.dumps(d) + "\n")
    with open(out / "queries.jsonl", "w", encoding="utf-8") as fh:
        for k, (_, _, text) in enumerate(QUERIES):
            fh.write(json.dumps({"_id": f"q{k + 1}", "text": text, "metadata": {}}) + "\n")
    with open(out / "qrels" / "test.tsv", "w", encoding="utf-8") as fh:
        fh.write("query-id\tcorpus-id\tscore\n")
        for k, (dom, i, _) in enumerate(QUERIES):
            fh.write(f"q{k + 1}\t{ids[(dom, i)]}\t2\n")
            # one partially relevant neighbour from the same domain
            fh.write(f"q{k + 1}\t{ids[(dom, (i + 1) % 10)]}\t1\n")


if __name__ == "__main__":
    main(Path(sys.argv[1] if len(sys.argv) > 1 else "src/docexpand/data/mini"))
