import pytest
from hypothesis import settings

from cdimpact.model import parse_model

# JIT compilation and first imports make single examples slow now and then
settings.register_profile("default", deadline=None)
settings.load_profile("default")

ORM_RULE_TEXT = '''impactRule "ORM File Analysis" {
  description = "This rule checks ..."
  impact {
    pc.addedPersistentClass() && addedActiveClass() =>
    "Add entry to mapping file for new class."
    pc.renamedPersistentAttribute() => "Rename entry in
    mapping file. Excerpt from file: {ORMFileExcerpt}"
  }
}
'''

RENAME_PRESETTING = 'renamed "de.TroubleCd#name" to "newName";\n'

ADDED_ACTIVE_EXT = 'define condition addedActiveClass = pc.addedClass() && pc.elementHasStereotype("active");\n'

ECU_OLD = """package de {
    package test {
    }
}
"""

ECU_NEW = """package de {
    package test {
        <<persistent>> <<active>> class ECU {
        }
    }
}
"""


@pytest.fixture
def ecu_models():
    return parse_model(ECU_OLD, "old.cd"), parse_model(ECU_NEW, "new.cd")


@pytest.fixture
def trouble_models():
    old = parse_model("package de { <<persistent>> class TroubleCd { <<persistent>> name: String [1] } }")
    new = parse_model("package de { <<persistent>> class TroubleCd { <<persistent>> newName: String [1] } }")
    return old, new
