"""End-to-end checks of the dilatone command line: exit codes, envelopes,
determinism and the flow -> limit -> exotic-trace pipeline."""

import json
import os
import subprocess
import sys
import tempfile
import unittest

BIN = sys.argv.pop(1)
CORPUS = sys.argv.pop(1)


def run(*args):
    p = subprocess.run([BIN, *args], capture_output=True, text=True)
    return p.returncode, p.stdout, p.stderr


def corpus(name):
    return os.path.join(CORPUS, name + ".json")


def payload(*args):
    code, out, err = run(*args)
    assert code == 0, err
    doc = json.loads(out)
    for key in ("tool", "version", "command", "input_hash", "mode", "approximate", "params", "payload"):
        assert key in doc, key
    return doc["payload"]


class Cli(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def test_every_corpus_surface_validates(self):
        for f in sorted(os.listdir(CORPUS)):
            if not f.endswith(".json") or f.startswith("aiet"):
                continue
            code, out, err = run("validate", os.path.join(CORPUS, f))
            self.assertEqual(code, 0, f + err)
            self.assertTrue(json.loads(out)["payload"]["valid"])

    def test_info_square_torus(self):
        p = payload("info", corpus("square_torus"))
        self.assertEqual(p["genus"], 1)
        self.assertEqual(p["singularities"], 1)
        self.assertTrue(p["singularity_list"][0]["marked"])
        self.assertEqual(p["complexity"], 2)

    def test_delaunay_square_torus(self):
        p = payload("delaunay", corpus("square_torus"))
        self.assertEqual(p["status"], "delaunay")
        faces = p["polygonation"]["faces"]
        self.assertEqual(len(faces), 1)
        self.assertEqual(len(faces[0]), 4)

    def test_delaunay_obstruction_is_a_domain_error(self):
        code, out, _ = run("delaunay", corpus("pi_cylinder_closed"), "--remove-regular")
        self.assertEqual(code, 1)
        self.assertEqual(json.loads(out)["payload"]["status"], "cylinder_obstruction")

    def test_sweep_finds_cylinders(self):
        svg = self.path("gaps.svg")
        p = payload("sweep", corpus("fig1_genus2"), "--n", "360", "--budget", "1000", "--svg", svg)
        self.assertGreater(len(p["cylinders"]), 0)
        for c in p["cylinders"]:
            for key in ("kind", "lambda", "theta", "modulus", "itinerary"):
                self.assertIn(key, c)
        with open(svg) as f:
            self.assertIn("<svg", f.read())

    def test_payloads_are_deterministic(self):
        a = payload("sweep", corpus("dilation_torus"), "--n", "24", "--budget", "500", "--workers", "1")
        b = payload("sweep", corpus("dilation_torus"), "--n", "24", "--budget", "500", "--workers", "3")
        self.assertEqual(json.dumps(a), json.dumps(b))
        self.assertEqual(run("info", corpus("fig1_genus2"))[1], run("info", corpus("fig1_genus2"))[1])

    def test_trace_and_render(self):
        svg = self.path("t.svg")
        p = payload("trace", corpus("square_torus"), "--start", "0,1/3,1/7", "--dir", "1,2", "--svg", svg)
        self.assertEqual(p["kind"], "closed")
        with open(svg) as f:
            self.assertIn("stroke-dasharray", f.read())
        code, out, _ = run("render", corpus("fig1_genus2"), "--delaunay")
        self.assertEqual(code, 0)
        self.assertTrue(out.startswith("<svg"))

    def test_saddles_and_cylinders(self):
        p = payload("saddles", corpus("square_torus"), "--max", "2")
        self.assertGreater(len(p["saddle_connections"]), 0)
        p = payload("cylinders", corpus("square_torus"), "--dir", "1,0")
        self.assertEqual(len(p["cylinders"]), 1)
        self.assertEqual(p["cylinders"][0]["modulus_exact"], "1")

    def test_flow_limit_exotic_pipeline(self):
        trace, exotic = self.path("flow.json"), self.path("exotic.json")
        code, _, err = run("flow", corpus("l_shape_genus2"), "--times", "log(16),log(64),log(256)", "--json", trace)
        self.assertEqual(code, 0, err)
        with open(trace) as f:
            doc = json.load(f)
        self.assertEqual(doc["mode"], "exact")
        self.assertIn("final", doc["payload"])
        p = payload("limit", trace, "--out", exotic)
        self.assertTrue(p["audit"]["ok"])
        self.assertTrue(p["lemmas"]["nonempty"])
        self.assertTrue(p["lemmas"]["closed"])
        p = payload("exotic-trace", exotic, "--dir", "1,1")
        self.assertTrue(p["closed"])
        self.assertTrue(all(c["kind"] == "edge_c" for c in p["cylinders"]))

    def test_hand_built_exotic_surface(self):
        p = payload("exotic-trace", os.path.join(CORPUS, "exotic", "two_tori_c_edge.json"), "--dir", "1,-2", "--start", "0,-1/2,3/4")
        self.assertTrue(p["closed"])
        self.assertEqual(p["traces"][0]["kind"], "hit_edge_c")
        self.assertIn("edge_c", [c["kind"] for c in p["cylinders"]])

    def test_flow_modes(self):
        code, _, err = run("flow", corpus("square_torus"), "--times", "0.5")
        self.assertEqual(code, 1, err)
        doc = json.loads(run("--mode", "approx", "flow", corpus("square_torus"), "--times", "0.5")[1])
        self.assertEqual(doc["mode"], "approx")
        self.assertTrue(doc["approximate"])

    def test_aiet_sweep(self):
        p = payload("aiet-sweep", corpus("aiet_two_branch"), "--step", "1/100", "--window", "1/10", "--max-period", "32")
        self.assertEqual(p["windows_covered"], p["windows"])

    def test_usage_errors(self):
        self.assertEqual(run()[0], 2)
        self.assertEqual(run("frobnicate")[0], 2)
        self.assertEqual(run("info", corpus("square_torus"), "--bogus")[0], 2)
        self.assertEqual(run("--mode", "fuzzy", "info", corpus("square_torus"))[0], 2)
        self.assertEqual(run("trace", corpus("square_torus"), "--start", "0,1/3,1/7", "--dir", "0,0")[0], 2)
        self.assertEqual(run("trace", corpus("square_torus"), "--dir", "1,0")[0], 2)

    def test_domain_errors(self):
        self.assertEqual(run("info", self.path("missing.json"))[0], 1)
        bad = self.path("bad.json")
        with open(bad, "w") as f:
            json.dump({"polygons": [[["0", "0"], ["1", "0"], ["1", "1"], ["0", "1"]]], "gluings": [{"from": [0, 0], "to": [0, 1]}]}, f)
        code, out, _ = run("validate", bad)
        self.assertEqual(code, 1)
        self.assertFalse(json.loads(out)["payload"]["valid"])
        self.assertEqual(run("info", bad)[0], 1)
        self.assertEqual(run("limit", corpus("square_torus"))[0], 1)


if __name__ == "__main__":
    unittest.main()
