import xml.etree.ElementTree as ET

import numpy as np

from jpa_selfenergy.svgplot import Panel, render


class TestRender:
    """Stand-alone SVG output."""

    def test_well_formed_with_one_group_per_panel(self):
        x = np.linspace(0, 1, 11)
        panels = [Panel(ylabel="a").add(x, x**2, "sq"), Panel(ylabel="b", logy=True).add(x, np.exp(x), dashed=True)]
        root = ET.fromstring(render(panels, xlabel="x", title="t"))
        assert root.tag.endswith("svg")
        assert len(root.findall(".//{*}polyline")) == 2

    def test_nan_values_do_not_break_output(self):
        x = np.linspace(0, 1, 5)
        y = np.array([1.0, np.nan, 2.0, np.inf, 3.0])
        text = render([Panel().add(x, y)])
        ET.fromstring(text)
        assert "nan" not in text.lower()
