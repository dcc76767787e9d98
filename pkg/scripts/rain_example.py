"""Explain the three-feature rain tree shipped in models/rain.json."""
from pathlib import Path

from linear_treeshap import explain, load_model
from linear_treeshap.oracle import shapley_bruteforce_all

model = load_model(Path(__file__).resolve().parents[1] / "models" / "rain.json")
tree = model.trees[0]
x = [20.0, 0.0, 6.0]  # 20 degrees, not cloudy, wind 6

a = explain(tree, x)
print(f"prediction {a.prediction:.3f}  base value {a.base_value:.3f}")
for name, v, ref in zip(model.feature_names, a.phi, shapley_bruteforce_all(tree, x)):
    print(f"  {name:12s} {v:+.6f}   (brute force {ref:+.6f})")
print(f"sum(phi) + base - prediction = {a.residual:.1e}")
