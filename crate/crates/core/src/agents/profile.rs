use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::catalog::{action_grants, granted, Tool};
use super::{AgentError, Result};
use crate::portfolio::{Action, ActionKind};

const OTTO: &str = include_str!("../../assets/profiles/otto.xml");
const BOB: &str = include_str!("../../assets/profiles/bob.xml");
const DAVE: &str = include_str!("../../assets/profiles/dave.xml");
const EMILY: &str = include_str!("../../assets/profiles/emily.xml");

/// An agent's identity and operating boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub name: String,
    pub description: String,
    pub agent_type: String,
    pub role: String,
    pub responsible_for: String,
    pub role_assignment: String,
    /// Permission names as written in the profile; see [`action_grants`].
    pub action_permissions: Vec<String>,
    pub tool_permissions: Vec<String>,
    pub market_info_permissions: Vec<String>,
    pub team_background: String,
}

impl AgentProfile {
    pub fn action_kinds(&self) -> BTreeSet<ActionKind> {
        granted(&self.action_permissions)
    }

    /// Hold is always allowed: it is the no-op every agent falls back to.
    pub fn permits(&self, action: &Action) -> bool {
        matches!(action, Action::Hold) || self.action_kinds().contains(&action.kind())
    }

    pub fn tools(&self) -> Vec<Tool> {
        self.tool_permissions.iter().filter_map(|t| Tool::lookup(t)).collect()
    }

    /// Role with its indefinite article, e.g. "an Investment Manager".
    pub fn role_phrase(&self) -> String {
        let article = match self.role.chars().next() {
            Some(c) if "AEIOUaeiou".contains(c) => "an",
            _ => "a",
        };
        format!("{article} {}", self.role)
    }
}

fn err(origin: &str, message: impl Into<String>) -> AgentError {
    AgentError::Profile {
        origin: origin.to_string(),
        message: message.into(),
    }
}

fn child<'a, 'i>(node: roxmltree::Node<'a, 'i>, tag: &str, origin: &str) -> Result<roxmltree::Node<'a, 'i>> {
    node.children()
        .find(|c| c.has_tag_name(tag))
        .ok_or_else(|| err(origin, format!("missing <{tag}> under <{}>", node.tag_name().name())))
}

fn text(node: roxmltree::Node, tag: &str, origin: &str) -> Result<String> {
    let c = child(node, tag, origin)?;
    let t = c.text().unwrap_or("").trim();
    if t.is_empty() {
        return Err(err(origin, format!("<{tag}> is empty")));
    }
    Ok(t.to_string())
}

fn list(node: roxmltree::Node, tag: &str, item: &str, origin: &str) -> Result<Vec<String>> {
    let c = child(node, tag, origin)?;
    Ok(c.children()
        .filter(|n| n.has_tag_name(item))
        .map(|n| n.text().unwrap_or("").trim().to_string())
        .collect())
}

/// Parses a profile document. Action and tool permissions must come from the closed
/// catalogs.
pub fn parse_profile(xml: &str, origin: &str) -> Result<AgentProfile> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| err(origin, e.to_string()))?;
    let root = doc.root_element();
    if !root.has_tag_name("profile") {
        return Err(err(origin, format!("root element is <{}>, expected <profile>", root.tag_name().name())));
    }
    let basic = child(root, "basicInformation", origin)?;
    let profile = AgentProfile {
        name: text(root, "name", origin)?,
        description: text(root, "description", origin)?,
        agent_type: text(basic, "agentType", origin)?,
        role: text(basic, "role", origin)?,
        responsible_for: text(basic, "responsibleFor", origin)?,
        role_assignment: text(basic, "roleAssignment", origin)?,
        action_permissions: list(root, "actionPermissions", "action", origin)?,
        tool_permissions: list(root, "toolPermissions", "tool", origin)?,
        market_info_permissions: list(root, "marketInformationPermissions", "scope", origin)?,
        team_background: text(child(root, "teamBackground", origin)?, "description", origin)?,
    };
    for a in &profile.action_permissions {
        if action_grants(a).is_none() {
            return Err(err(origin, format!("unknown action permission {a:?}")));
        }
    }
    for t in &profile.tool_permissions {
        if Tool::lookup(t).is_none() {
            return Err(err(origin, format!("unknown tool {t:?}")));
        }
    }
    Ok(profile)
}

pub fn load_profile(path: &Path) -> Result<AgentProfile> {
    let xml = std::fs::read_to_string(path).map_err(|e| AgentError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_profile(&xml, &path.display().to_string())
}

/// The four-member team: manager plus market, strategy and risk analysts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Team {
    pub manager: AgentProfile,
    pub strategy: AgentProfile,
    pub risk: AgentProfile,
    pub market: AgentProfile,
}

impl Team {
    /// Loads `otto.xml`, `bob.xml`, `dave.xml` and `emily.xml` from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Team> {
        Ok(Team {
            manager: load_profile(&dir.join("otto.xml"))?,
            strategy: load_profile(&dir.join("bob.xml"))?,
            risk: load_profile(&dir.join("dave.xml"))?,
            market: load_profile(&dir.join("emily.xml"))?,
        })
    }

    pub fn members(&self) -> [&AgentProfile; 4] {
        [&self.manager, &self.strategy, &self.risk, &self.market]
    }
}

/// The bundled profiles.
pub fn shipped_profiles() -> Team {
    let p = |xml, name| parse_profile(xml, name).expect("bundled profile parses");
    Team {
        manager: p(OTTO, "otto.xml"),
        strategy: p(BOB, "bob.xml"),
        risk: p(DAVE, "dave.xml"),
        market: p(EMILY, "emily.xml"),
    }
}
