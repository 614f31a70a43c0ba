#!/usr/bin/env python3
"""Writes tests/fixtures/conflicts/{defective,clean}/*.json.

Each file holds the objects of one case and the structural conflicts the detector
must report for them (kind plus the property ids involved, per object).
"""
import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "conflicts"


class Builder:
    def __init__(self):
        self.objects = []
        self.next_prop = 1

    def obj(self, oid, title):
        o = {"schema_version": 1, "id": oid, "title": title, "template_refs": [], "version": 1, "notes": "",
             "properties": []}
        self.objects.append(o)
        return o

    def prop(self, o, name, value, polarity="include", seq=None, child=None):
        pid = "pr-%04d" % self.next_prop
        self.next_prop += 1
        relation = {"kind": "parallel"} if seq is None else {"kind": "sequential", "group": seq[0], "order": seq[1]}
        val = {"kind": "child", "ref": child} if child else {"kind": "text", "text": value}
        o["properties"].append({"id": pid, "name": name, "polarity": polarity, "tier": "normal", "relation": relation,
                                "value": val, "candidates": [], "examples": [], "references": [],
                                "provenance": "user"})
        return pid


def write(kind, name, description, b, expect):
    path = OUT / kind / (name + ".json")
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"description": description, "objects": b.objects, "expect": expect}
    path.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def defective():
    b = Builder()
    o = b.obj("po-0001", "Snack ideas for a school party")
    a = b.prop(o, "Ingredients", "fruit and crackers")
    x = b.prop(o, "ingredients ", "anything with nuts", "exclude")
    write("defective", "include-exclude-name", "Same name wanted and excluded", b,
          [{"object": "po-0001", "kind": "include_exclude", "prop_ids": [a, x]}])

    b = Builder()
    o = b.obj("po-0001", "Weekend in Berlin")
    b.prop(o, "Destination", "Berlin")
    a = b.prop(o, "Evenings", "Nightlife")
    x = b.prop(o, "Avoid", "  nightlife ", "exclude")
    write("defective", "include-exclude-value", "Same value wanted and excluded", b,
          [{"object": "po-0001", "kind": "include_exclude", "prop_ids": [a, x]}])

    b = Builder()
    o = b.obj("po-0001", "Dinner menu")
    a = b.prop(o, "Main", "Peanut noodles")
    c = b.prop(o, "Dessert", "Sorbet")
    x = b.prop(o, "Allergens", "peanut noodles", "exclude")
    y = b.prop(o, "dessert", "anything sweet", "exclude")
    write("defective", "include-exclude-double", "Two collisions in one object", b,
          [{"object": "po-0001", "kind": "include_exclude", "prop_ids": [a, x]},
           {"object": "po-0001", "kind": "include_exclude", "prop_ids": [c, y]}])

    b = Builder()
    o = b.obj("po-0001", "Bedtime story")
    p1 = b.prop(o, "Beginning", "A lost kitten", seq=("plot", 1))
    p3 = b.prop(o, "Ending", "Home again", seq=("plot", 3))
    write("defective", "sequential-gap-middle", "Step 2 missing", b,
          [{"object": "po-0001", "kind": "sequential_gap", "prop_ids": [p1, p3]}])

    b = Builder()
    o = b.obj("po-0001", "Deployment runbook")
    p2 = b.prop(o, "Migrate", "Run the schema migration", seq=("steps", 2))
    p3 = b.prop(o, "Verify", "Check the health endpoint", seq=("steps", 3))
    write("defective", "sequential-gap-start", "Step 1 missing", b,
          [{"object": "po-0001", "kind": "sequential_gap", "prop_ids": [p2, p3]}])

    b = Builder()
    o = b.obj("po-0001", "Workout plan")
    w1 = b.prop(o, "Warm-up", "Jog five minutes", seq=("session", 1))
    w2 = b.prop(o, "Strength", "Squats", seq=("session", 2))
    c1 = b.prop(o, "Monday", "Legs", seq=("week", 1))
    c4 = b.prop(o, "Thursday", "Arms", seq=("week", 4))
    write("defective", "sequential-gap-second-group", "Only the second group has a gap", b,
          [{"object": "po-0001", "kind": "sequential_gap", "prop_ids": [c1, c4]}])

    b = Builder()
    o = b.obj("po-0001", "Trip to Lisbon")
    b.prop(o, "Destination", "Lisbon")
    d = b.prop(o, "Schedule", None, child="po-0009")
    write("defective", "dangling-child", "Child object missing", b,
          [{"object": "po-0001", "kind": "dangling_child", "prop_ids": [d]}])

    b = Builder()
    o = b.obj("po-0001", "Conference talk")
    b.prop(o, "Outline", None, child="po-0002")
    c = b.obj("po-0002", "Outline")
    b.prop(c, "Opening", "A surprising statistic")
    d = b.prop(c, "Demo", None, child="po-0003")
    write("defective", "dangling-grandchild", "Grandchild missing below a present child", b,
          [{"object": "po-0002", "kind": "dangling_child", "prop_ids": [d]}])

    b = Builder()
    o = b.obj("po-0001", "Newsletter")
    s1 = b.prop(o, "Intro", "What changed", seq=("sections", 1))
    s3 = b.prop(o, "Outro", "What is next", seq=("sections", 3))
    d = b.prop(o, "Highlights", None, child="po-0004")
    a = b.prop(o, "Tone", "Formal")
    x = b.prop(o, "Register", "formal", "exclude")
    write("defective", "mixed", "One conflict of each kind", b,
          [{"object": "po-0001", "kind": "include_exclude", "prop_ids": [a, x]},
           {"object": "po-0001", "kind": "sequential_gap", "prop_ids": [s1, s3]},
           {"object": "po-0001", "kind": "dangling_child", "prop_ids": [d]}])


def clean():
    b = Builder()
    o = b.obj("po-0001", "Snack ideas for a school party")
    b.prop(o, "Ingredients", "fruit and crackers")
    b.prop(o, "Allergens", "anything with nuts", "exclude")
    write("clean", "exclusion-without-overlap", "Exclusion that shares nothing with an inclusion", b, [])

    b = Builder()
    o = b.obj("po-0001", "Weekend in Berlin")
    b.prop(o, "Evenings", "Nightlife clubs")
    b.prop(o, "Avoid", "Nightlife", "exclude")
    write("clean", "value-substring", "An excluded value that is only a substring of a wanted one", b, [])

    b = Builder()
    o = b.obj("po-0001", "Recipe")
    b.prop(o, "Prep", "Chop", seq=("method", 1))
    b.prop(o, "Cook", "Simmer", seq=("method", 2))
    b.prop(o, "Serve", "Plate", seq=("method", 3))
    b.prop(o, "Day 1", "Shop", seq=("week", 1))
    write("clean", "contiguous-groups", "Two groups, both contiguous", b, [])

    b = Builder()
    o = b.obj("po-0001", "Story")
    b.prop(o, "Ending", "Home", seq=("plot", 2))
    b.prop(o, "Beginning", "Lost", seq=("plot", 1))
    write("clean", "out-of-order-storage", "Contiguous steps stored out of order", b, [])

    b = Builder()
    o = b.obj("po-0001", "Conference talk")
    b.prop(o, "Outline", None, child="po-0002")
    c = b.obj("po-0002", "Outline")
    b.prop(c, "Demo", None, child="po-0003")
    g = b.obj("po-0003", "Demo")
    b.prop(g, "Tool", "A live terminal")
    write("clean", "nested-present", "Every child present two levels down", b, [])

    b = Builder()
    o = b.obj("po-0001", "Empty")
    write("clean", "empty", "No properties", b, [])

    b = Builder()
    o = b.obj("po-0001", "Exclusions only")
    b.prop(o, "Jargon", "acronyms", "exclude")
    b.prop(o, "Length", "over a page", "exclude")
    write("clean", "exclusions-only", "Nothing to collide with", b, [])

    b = Builder()
    o = b.obj("po-0001", "Blank values")
    b.prop(o, "Audience", "")
    b.prop(o, "Budget", "", "exclude")
    write("clean", "empty-values", "Empty values never collide by value", b, [])


if __name__ == "__main__":
    defective()
    clean()
