"""Predict temporary scores for CVEs still waiting on an official analysis.

Trains the TF-IDF + random-forest classifier on synthetic assessed rows,
then scores brand-new descriptions. Predicted scores are marked as such
and get replaced when an official assessment arrives (reconcile). Run:
python3 demos/04_score_prediction.py
"""
import random

from itsrisk import predictor

TEMPLATES = [
    ("buffer overflow in {p} allows remote attackers to execute arbitrary code", 9.8),
    ("cross-site scripting in {p} allows script injection", 6.1),
    ("information disclosure in {p} reveals configuration data", 5.3),
    ("denial of service in {p} via malformed input", 7.5),
]
PRODUCTS = ["the web console", "the ftp daemon", "libimage", "the report engine",
            "the message broker", "the ingest service", "the token validator"]

rng = random.Random(11)
rows = []
for index in range(400):
    template, score = TEMPLATES[rng.randrange(len(TEMPLATES))]
    noise = rng.choice([-0.1, 0.0, 0.0, 0.1])
    rows.append(
        (f"CVE-2023-{10000 + index}",
         template.format(p=rng.choice(PRODUCTS)),
         round(score + noise, 1))
    )

train_rows, heldout = predictor.split_rows(rows, seed=0)
model = predictor.train(train_rows, split_seed=0)
report = predictor.evaluate(model, heldout)
print(f"trained on {len(train_rows)} rows "
      f"({model.metadata['train_seconds']:.2f}s)")
print(f"held-out: accuracy {report.accuracy:.2%}, rmse {report.rmse:.3f} "
      f"over {report.n_test} rows")
print(f"label set: {model.label_set}")

print("\nscoring unassessed descriptions:")
for text in [
    "buffer overflow in the scheduler allows remote attackers to execute arbitrary code",
    "cross-site scripting in the admin panel allows script injection",
    "denial of service in the resolver via malformed input",
]:
    score, provenance = predictor.predict(model, text)
    print(f"  {score:>4.1f} [{provenance.value}]  {text}")
