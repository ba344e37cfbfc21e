import pytest
from fastapi.testclient import TestClient

from orclayout.service import create_app

DEMO = """
layout "demo" {
  window { width: 200; height: 100; }
  widget a { pref: 50x20; }
  widget b { pref: 50x20; }
  pattern hflow(items: [a, b], container: root);
}
"""

ROTATION = """
layout "rot" {
  window { width: 300; height: 100; }
  widget g { pref: 100x100; }
  widget c1 { pref: 40x40; }
  widget c2 { pref: 40x40; }
  widget c3 { pref: 40x40; }
  pattern rotate_group(group: g, children: [c1, c2, c3]);
}
"""


@pytest.fixture
def client():
    return TestClient(create_app())


def create(client, spec=DEMO):
    response = client.post("/v1/sessions", json={"spec": spec})
    assert response.status_code == 201, response.text
    return response.json()


def test_create_session(client):
    body = create(client)
    assert body["revision"] == 0
    assert body["solution"]["optimal"] is True
    widgets = {w["id"]: w for w in body["solution"]["widgets"]}
    assert widgets["b"]["left"] == 50.0
    assert body["solution"]["solve_ms"] >= 0


def test_create_broken_spec_gives_diagnostics(client):
    response = client.post("/v1/sessions", json={"spec": 'layout "x" { widget a { '})
    assert response.status_code == 422
    diags = response.json()["diagnostics"]
    assert diags and all("line" in d and "column" in d for d in diags)


def test_create_infeasible_spec_reports_conflicts(client):
    spec = (
        'layout "c" { widget a { pref: 10x10; } '
        "constraint hard: a.left >= 5; constraint hard: a.left <= 1; }"
    )
    body = create(client, spec)
    assert body["solution"] is None
    assert set(body["conflicts"]) == {"c1", "c2"}


def test_get_solution_matches_create(client):
    body = create(client)
    sid = body["id"]
    got = client.get(f"/v1/sessions/{sid}/solution").json()
    assert got["revision"] == 0
    assert got["solution"]["widgets"] == body["solution"]["widgets"]


def test_get_solution_unknown_session(client):
    assert client.get("/v1/sessions/nope/solution").status_code == 404


def test_viewport_override_is_read_only(client):
    body = create(client, ROTATION)
    sid = body["id"]
    horizontal = {w["id"]: w for w in body["solution"]["widgets"]}
    assert horizontal["g"]["width"] == 120.0
    preview = client.get(f"/v1/sessions/{sid}/solution?width=100&height=300").json()
    widgets = {w["id"]: w for w in preview["solution"]["widgets"]}
    assert widgets["g"]["height"] == 120.0  # vertical stack under the override
    again = client.get(f"/v1/sessions/{sid}/solution").json()
    assert again["revision"] == 0
    assert {w["id"]: w for w in again["solution"]["widgets"]}["g"]["width"] == 120.0


def test_noop_edit_keeps_weight(client):
    body = create(client)
    sid = body["id"]
    response = client.post(
        f"/v1/sessions/{sid}/edits",
        json={
            "expected_revision": 0,
            "edit": {"type": "set_viewport", "width": 200, "height": 100},
        },
    )
    assert response.status_code == 200
    after = response.json()
    assert after["revision"] == 1
    assert after["solution"]["satisfied_weight"] == body["solution"]["satisfied_weight"]


def test_revision_mismatch_409(client):
    sid = create(client)["id"]
    response = client.post(
        f"/v1/sessions/{sid}/edits",
        json={"expected_revision": 5, "edit": {"type": "set_viewport", "width": 100, "height": 100}},
    )
    assert response.status_code == 409
    assert response.json()["error"] == "revision mismatch"


def test_insert_widget_into_flow(client):
    sid = create(client)["id"]
    response = client.post(
        f"/v1/sessions/{sid}/edits",
        json={
            "expected_revision": 0,
            "edit": {
                "type": "insert_widget",
                "widget": {"id": "c", "pref": [50, 20]},
                "pattern": 0,
            },
        },
    )
    assert response.status_code == 200
    widgets = {w["id"]: w for w in response.json()["solution"]["widgets"]}
    # 3 x 50px in a 200px window: single row
    assert widgets["c"]["left"] == 100.0 and widgets["c"]["top"] == 0.0


def test_conflicting_constraint_rolls_back(client):
    sid = create(client)["id"]
    before_spec = client.get(f"/v1/sessions/{sid}/spec").json()["spec"]
    response = client.post(
        f"/v1/sessions/{sid}/edits",
        json={
            "expected_revision": 0,
            "edit": {
                "type": "add_constraint",
                "strength": "hard",
                "formula": "a.left >= 500",
            },
        },
    )
    assert response.status_code == 409
    assert response.json()["conflicts"]
    after = client.get(f"/v1/sessions/{sid}/solution").json()
    assert after["revision"] == 0
    assert client.get(f"/v1/sessions/{sid}/spec").json()["spec"] == before_spec


def test_invalid_edit_422(client):
    sid = create(client)["id"]
    response = client.post(
        f"/v1/sessions/{sid}/edits",
        json={"expected_revision": 0, "edit": {"type": "explode"}},
    )
    assert response.status_code == 422
    assert "explode" in response.json()["error"]


def test_move_widget_soft_preference(client):
    # dragging b to the next-row spot beats the flow's to-the-right preference;
    # the drag is a soft preference, never a hard pin
    sid = create(client)["id"]
    response = client.post(
        f"/v1/sessions/{sid}/edits",
        json={
            "expected_revision": 0,
            "edit": {"type": "move_widget", "id": "b", "left": 0, "top": 20},
        },
    )
    assert response.status_code == 200
    widgets = {w["id"]: w for w in response.json()["solution"]["widgets"]}
    assert (widgets["b"]["left"], widgets["b"]["top"]) == (0.0, 20.0)
    spec = client.get(f"/v1/sessions/{sid}/spec").json()["spec"]
    assert "constraint soft(2): b.left == 0 && b.top == 20;" in spec
    # a drag to a flow-unreachable point loses to the flow clauses: no pin
    response = client.post(
        f"/v1/sessions/{sid}/edits",
        json={
            "expected_revision": 1,
            "edit": {"type": "move_widget", "id": "b", "left": 13, "top": 77},
        },
    )
    assert response.status_code == 200
    widgets = {w["id"]: w for w in response.json()["solution"]["widgets"]}
    assert (widgets["b"]["left"], widgets["b"]["top"]) == (50.0, 0.0)
    spec = client.get(f"/v1/sessions/{sid}/spec").json()["spec"]
    assert spec.count("constraint soft(2): b.left ==") == 1  # replaced, not stacked


def test_delete_widget_cascades(client):
    sid = create(client)["id"]
    response = client.post(
        f"/v1/sessions/{sid}/edits",
        json={"expected_revision": 0, "edit": {"type": "delete_widget", "id": "b"}},
    )
    assert response.status_code == 200
    widgets = [w["id"] for w in response.json()["solution"]["widgets"]]
    assert widgets == ["a"]
    spec = client.get(f"/v1/sessions/{sid}/spec").json()["spec"]
    assert "widget b" not in spec
    assert "items: [a]" in spec


def test_resize_widget_updates_pref(client):
    sid = create(client)["id"]
    response = client.post(
        f"/v1/sessions/{sid}/edits",
        json={
            "expected_revision": 0,
            "edit": {"type": "resize_widget", "id": "a", "width": 70, "height": 25},
        },
    )
    assert response.status_code == 200
    widgets = {w["id"]: w for w in response.json()["solution"]["widgets"]}
    assert widgets["a"]["width"] == 70.0 and widgets["a"]["height"] == 25.0


def test_add_remove_pattern(client):
    sid = create(client, 'layout "p" { widget x { pref: 30x30; } widget y { pref: 30x30; } }')[
        "id"
    ]
    response = client.post(
        f"/v1/sessions/{sid}/edits",
        json={
            "expected_revision": 0,
            "edit": {
                "type": "add_pattern",
                "kind": "equalize",
                "args": {"items": ["x", "y"]},
            },
        },
    )
    assert response.status_code == 200
    assert "pattern equalize" in client.get(f"/v1/sessions/{sid}/spec").json()["spec"]
    response = client.post(
        f"/v1/sessions/{sid}/edits",
        json={"expected_revision": 1, "edit": {"type": "remove_pattern", "index": 0}},
    )
    assert response.status_code == 200
    assert "pattern" not in client.get(f"/v1/sessions/{sid}/spec").json()["spec"]


def test_delete_session(client):
    sid = create(client)["id"]
    assert client.delete(f"/v1/sessions/{sid}").status_code == 204
    assert client.get(f"/v1/sessions/{sid}/solution").status_code == 404
    assert client.delete(f"/v1/sessions/{sid}").status_code == 404


def test_snapshot_on_shutdown(tmp_path):
    app = create_app(snapshot_dir=str(tmp_path / "snaps"))
    with TestClient(app) as running:
        body = running.post("/v1/sessions", json={"spec": DEMO}).json()
    snap = tmp_path / "snaps" / f"{body['id']}.json"
    assert snap.exists()
    assert "layout" in snap.read_text(encoding="utf-8")


def test_concurrent_edits_observe_total_order(client):
    import threading

    sid = create(client)["id"]
    accepted = []
    lock = threading.Lock()

    def worker(k):
        for i in range(5):
            while True:
                current = client.get(f"/v1/sessions/{sid}/solution").json()["revision"]
                response = client.post(
                    f"/v1/sessions/{sid}/edits",
                    json={
                        "expected_revision": current,
                        "edit": {
                            "type": "set_viewport",
                            "width": 200 + k * 10 + i,
                            "height": 100,
                        },
                    },
                )
                if response.status_code == 200:
                    with lock:
                        accepted.append(response.json()["revision"])
                    break
                assert response.status_code == 409

    threads = [threading.Thread(target=worker, args=(k,)) for k in range(3)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    # every accepted edit got a unique revision and none were skipped
    assert sorted(accepted) == list(range(1, 16))
    final = client.get(f"/v1/sessions/{sid}/solution").json()
    assert final["revision"] == 15


def test_pattern_error_during_lowering_is_422_not_500(client):
    # balanced flow needs a constant container; a widget container must be
    # rejected cleanly with the session untouched
    sid = create(client, 'layout "p" { widget box { pref: 100x100; } widget x { pref: 10x10; } }')[
        "id"
    ]
    response = client.post(
        f"/v1/sessions/{sid}/edits",
        json={
            "expected_revision": 0,
            "edit": {
                "type": "add_pattern",
                "kind": "balanced",
                "args": {"items": ["x"], "container": "box"},
            },
        },
    )
    assert response.status_code == 422
    assert "constant container" in response.json()["error"]
    assert client.get(f"/v1/sessions/{sid}/solution").json()["revision"] == 0


def test_what_if_override_reports_conflicts_for_infeasible_viewport(client):
    # the ribbon's high-priority widget is hard-pinned at 60px wide; a 30px
    # preview viewport cannot satisfy it and must not disturb the session
    ribbon = (
        'layout "r" { window { width: 200; height: 60; } '
        "widget h { pref: 60x30; priority: high; } "
        "pattern optional(target: h); "
        "constraint hard: h.left == 0 && h.top == 0; }"
    )
    sid = create(client, ribbon)["id"]
    got = client.get(f"/v1/sessions/{sid}/solution?width=30&height=60").json()
    assert got["solution"] is None
    assert got["conflicts"]
    after = client.get(f"/v1/sessions/{sid}/solution").json()
    assert after["revision"] == 0 and after["solution"] is not None
