"""Prompt templates for the generation pipeline.

Templates are fixed text with ``${name}`` slots (``string.Template`` syntax);
rendering only ever replaces the slots. The wording, including its grammar,
is kept exactly as used by the original pipeline so that runs stay comparable.
"""

from __future__ import annotations

from string import Template
from typing import Iterable

from .model import Topic

RELATIONS = """\
## Task

You will receive a list of spreadsheet components, each accompanied by comments, descriptions, and detailed data.
Your task is to identify pairs of components that have a logical relationship.
For example, if summary_table_1 summarizes data from main_table_1, you should extract and present this relationship as:
(main_table_1, summary_table_1)

## Hints

(1) Relationships can be based on dependencies, references, or summarization within the spreadsheet structure.
(2) If component_A describes, summarizes, or illustrates data derived from component_B, then A and B are related.
(3) Organize the results in list of lists, where the inner list should be a 2-component list like [A, B].

## Spreadsheet Components

${components}
"""

# Same skeleton as RELATIONS, asking for the topic label and component typing instead.
CLASSIFY = """\
## Task

You will receive a list of spreadsheet components, each accompanied by comments, descriptions, and detailed data.
Your task is to classify the entire spreadsheet into one of the topics below, and to assign each component a type and a one-line description.

## Hints

(1) The topic must be exactly one of: ${topics}.
(2) The type of each component must be one of: title, main_table, meta_data, summary_data, chart.
(3) Organize the results as a JSON object {"topic": ..., "components": [{"id": ..., "type": ..., "description": ...}]}.

## Spreadsheet Components

${components}
"""

PLACEMENT_INSTRUCTIONS = """\
There are some hints to place the elements:

- The location of elements should be provided via the "location" attribute, which should be a list of two strings indicating the left-top and bottom down corner of the element. Example: ["A1", "C3"].

- The elements placed should align with each other. You can also maintain some symmetry.
\t- Specially, maintain a type-aware alignment between element groups. For example, the metadata tables should be aligned with each other.
\t- Specially, maintain a relation-aware alignment between elements. For example, the chart demonstrating certain main-table should be aligned with that main-table.

- Avoid overlapping the elements.

- The spreadsheet is a 2D grid, so don't place the elements wholly horizontally or vertically. Arrange them in a compound manner.

- When placing the elements, you can leave some space as margins between them. But, avoid leaving too much space empty in the whole spreadsheet.

- Place the elements considering the relationship between them, for example, the summary-table should be placed below the main-table.

- You can change the size of the components following these rules:
\t- Title: can be arbitrarily resized.
\t- Main-table: you can add empty rows (or namely, changing the height of the table) to make it look good. But, the width should be the same as the given width.
\t- Meta-data, summary data: not re-sizable.

- The title should be placed at the top of the spreadsheet, spanning all active columns where there are components.

- Do not duplicate the components, each type of components should be placed under the corresponding lists.
"""

PLACEMENT = (
    """\
## Task

I will provide you with a spreadsheet skeleton with multiple elements including title, main-table, meta-data, summary-table, and charts in JSON.
The task is to place the elements by setting their position in the spreadsheet in a good structure.

## Instructions

"""
    + PLACEMENT_INSTRUCTIONS
    + """
## Spreadsheet Skeleton Set

${skeleton}
"""
)

REFLECTION = (
    """\
## Task

I will provide you with a spreadsheet layout with multiple elements including title, main-table, meta-data, summary-table, and charts in JSON.
Your task is to revise the structure following the instructions. I will first provide you with the general instructions,
then is the specific instructions I want you to follow. You will need to revise the structure of the spreadsheet accordingly.

## General Instructions

"""
    + PLACEMENT_INSTRUCTIONS
    + """
## Specific Instructions

${specific}

## Spreadsheet layout

${layout}
"""
)

POPULATION = """\
## Task

I will provide you with a spreadsheet with multiple elements including title, main-table, meta-data, summary-table, and charts in JSON.
These components include their location in the spreadsheet, as well as their content.
Your task is to generate the proper line heights and column widths for the spreadsheet, as well as adding line breaks to the content.
The fundamental goal is to (1) make the cells compatible with the content, and (2) make the spreadsheet visually appealing.

## Instructions

There are some hints:
- Carefully consider the content of each cell and adjust the row height and column width accordingly.
- For a cell with lengthy content, you can either wrap the text for a line break, or increase the column width.
- Try assigning line heights and column widths and line breaks to make (1) the spreadsheet is balanced vertically and horizontally, and (2) the neither too compact nor too much empty spaces..
- You may assume a default font setting of Calibri 11 and excel standard column width and row heights, where 1 character
of text are compatible with 0.65 of column width.

## Spreadsheet Skeleton Set with Contents

${sheet}
"""

TEMPLATES: dict[str, str] = {
    "relations": RELATIONS,
    "classify": CLASSIFY,
    "placement": PLACEMENT,
    "reflection": REFLECTION,
    "population": POPULATION,
}


def render(template: str, **slots: str) -> str:
    """Fill every slot of ``template``; missing or unknown slots raise KeyError."""
    t = Template(template)
    names = {m.group("named") or m.group("braced") for m in t.pattern.finditer(template)} - {None}
    unknown = set(slots) - names
    if unknown:
        raise KeyError(f"unknown template slots: {sorted(unknown)}")
    return t.substitute(slots)


def classify_prompt(components_json: str, topics: Iterable[Topic] = tuple(Topic)) -> str:
    return render(CLASSIFY, topics=", ".join(t.value for t in topics), components=components_json)


def relations_prompt(components_json: str) -> str:
    return render(RELATIONS, components=components_json)


def placement_prompt(skeleton_json: str) -> str:
    return render(PLACEMENT, skeleton=skeleton_json)


def reflection_prompt(instructions: Iterable[str], layout_json: str) -> str:
    return render(REFLECTION, specific="\n".join(f"- {s}" for s in instructions), layout=layout_json)


def population_prompt(sheet_json: str) -> str:
    return render(POPULATION, sheet=sheet_json)
