use std::collections::BTreeMap;

use super::ast::*;
use super::STRING_CLASS;

/// A program that passed type checking. Every expression carries its type
/// and every name is resolved; the hierarchy is acyclic with single
/// inheritance.
#[derive(Clone, Debug, PartialEq)]
pub struct TypedProgram {
    pub program: Program,
    index: BTreeMap<Name, usize>,
}

impl TypedProgram {
    /// Wraps a program whose class names are unique and whose inheritance
    /// graph is acyclic. Only the type checker constructs these.
    pub(super) fn new(program: Program) -> TypedProgram {
        let index = program.classes.iter().enumerate().map(|(i, c)| (c.name.clone(), i)).collect();
        TypedProgram { program, index }
    }

    pub(super) fn program_mut(&mut self) -> &mut Program {
        &mut self.program
    }

    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.index.get(name).map(|&i| &self.program.classes[i])
    }

    /// Class names in sorted order.
    pub fn class_names(&self) -> impl Iterator<Item = &Name> {
        self.index.keys()
    }

    pub fn is_class(&self, name: &str) -> bool {
        name == STRING_CLASS || self.index.contains_key(name)
    }

    /// The class itself followed by its proper ancestors, nearest first.
    pub fn ancestors(&self, name: &str) -> Vec<&ClassDecl> {
        let mut out = Vec::new();
        let mut cur = self.class(name);
        while let Some(c) = cur {
            out.push(c);
            cur = c.parent.as_deref().and_then(|p| self.class(p));
        }
        out
    }

    pub fn is_descendant(&self, sub: &str, sup: &str) -> bool {
        sub == sup || self.ancestors(sub).iter().any(|c| c.name == sup)
    }

    /// `sub` conforms to `sup`.
    pub fn conforms(&self, sub: &Type, sup: &Type) -> bool {
        match (sub, sup) {
            (Type::None, Type::Class(_)) => true,
            (Type::Class(a), Type::Class(b)) => self.is_descendant(a, b),
            (a, b) => a == b,
        }
    }

    /// Direct heirs of a class, sorted by name.
    pub fn children(&self, name: &str) -> Vec<&ClassDecl> {
        self.index.values().map(|&i| &self.program.classes[i]).filter(|c| c.parent.as_deref() == Some(name)).collect()
    }

    /// The class and all its descendants in depth-first pre-order, heirs
    /// visited in name order.
    pub fn descendants(&self, name: &str) -> Vec<&ClassDecl> {
        let mut out = Vec::new();
        if let Some(c) = self.class(name) {
            let mut stack = vec![c];
            while let Some(c) = stack.pop() {
                out.push(c);
                let mut kids = self.children(&c.name);
                kids.reverse();
                stack.extend(kids);
            }
        }
        out
    }

    /// Attribute visible in `class`, with the class that declares it.
    pub fn attribute(&self, class: &str, name: &str) -> Option<(&ClassDecl, &Attribute)> {
        self.ancestors(class).into_iter().find_map(|c| c.attribute(name).map(|a| (c, a)))
    }

    /// All attributes visible in `class`, ancestors' first.
    pub fn all_attributes(&self, class: &str) -> Vec<(&ClassDecl, &Attribute)> {
        let mut out = Vec::new();
        for c in self.ancestors(class).into_iter().rev() {
            out.extend(c.attributes.iter().map(|a| (c, a)));
        }
        out
    }

    /// The declaration of routine `name` that applies in `class`: the one in
    /// `class` itself or in its nearest ancestor.
    pub fn routine(&self, class: &str, name: &str) -> Option<(&ClassDecl, &Routine)> {
        self.ancestors(class).into_iter().find_map(|c| c.routine(name).map(|r| (c, r)))
    }

    /// Every declaration of `name` along the ancestor chain of `class`, from
    /// the original (topmost) declaration down to the one nearest `class`.
    pub fn declaration_chain(&self, class: &str, name: &str) -> Vec<(&ClassDecl, &Routine)> {
        let mut out: Vec<_> =
            self.ancestors(class).into_iter().filter_map(|c| c.routine(name).map(|r| (c, r))).collect();
        out.reverse();
        out
    }

    /// The original declaration of `name` as seen from `class`.
    pub fn origin(&self, class: &str, name: &str) -> Option<(&ClassDecl, &Routine)> {
        self.declaration_chain(class, name).into_iter().next()
    }

    /// Class invariant clauses applying to `class`, ancestors' first.
    pub fn invariant(&self, class: &str) -> Vec<&Clause> {
        self.ancestors(class).into_iter().rev().flat_map(|c| c.invariant.iter()).collect()
    }

    /// All (class, routine) declarations in the program, in declaration order.
    pub fn routines(&self) -> impl Iterator<Item = (&ClassDecl, &Routine)> {
        self.program.classes.iter().flat_map(|c| c.routines.iter().map(move |r| (c, r)))
    }
}
