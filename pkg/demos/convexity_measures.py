# Compare the polytope-based concavity with the perimeter (PB) and region (RB)
# baselines on a few synthetic shapes.
#
#     python demos/convexity_measures.py

from dnsm import decompose, shapes
from dnsm.convexity import baseline_concavities, compute_regions, significance

# 1. A thin slit barely changes the area but lengthens the perimeter a lot,
#    so RB hardly notices it while PB does.
pb, rb = baseline_concavities(shapes.square_with_slit(100, 40))
print(f"square with slit   PB {pb:.3f}   RB {rb:.3f}")

# 2. Two shapes built from the same two boxes.  In (a) the second box mostly
#    sticks out; in (b) it mostly hides inside the first one.  The outlines
#    are alike, so PB and RB barely move, while C of the second box does.
for key, (shape, model) in shapes.two_part_configurations().items():
    stats = significance(compute_regions(model, shape))
    pb, rb = baseline_concavities(shape)
    print(f"configuration ({key})  C(2) {stats[1].significance:.3f}   PB {pb:.3f}   RB {rb:.3f}")

# 3. Full pipeline on shapes of growing complexity (this takes a minute).
for name, shape in [("disc", shapes.disc(40)), ("L", shapes.l_shape(40)),
                    ("plus", shapes.plus_sign(40))]:
    rep = decompose(shape).report
    print(f"{name:5s} DNSM {rep.dnsm_concavity:.3f}   PB {rep.pb_concavity:.3f}   "
          f"RB {rep.rb_concavity:.3f}   parts {len(rep.per_polytope)}")
