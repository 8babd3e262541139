"""Multiplicities of finite-group representations in the homology of
quotient complexes, with spectral measures, determinants and approximation
experiments along chains of finite quotients."""

from .finite_groups import (CharacterTable, FiniteGroup, FiniteSubgroup,
                            GroupHom, OrdinaryCharacter, abelian_group,
                            centralizer_index, character_table,
                            conjugacy_classes, cyclic_group, dihedral_group,
                            frobenius_check, from_generators,
                            hom_from_generator_images, induce_ordinary,
                            multiplicity, restrict_ordinary,
                            semidirect_vector_group, symmetric_group,
                            trivial_group)
from .word_groups import (FiniteAlgebraMatrix, FiniteIndexSubgroup,
                          FreeAbelianGroup, FreeByFiniteGroup, FreeGroup,
                          GroupRingMatrix, InfiniteDihedralGroup,
                          QuotientChain, QuotientMap, Word, normal_form,
                          push_matrix, validate_chain)
from .characters import (BisetCharacter, FiniteCharacter, LimitCharacterSpec,
                         biset_character, convergence_report, i_finite,
                         ind_finite, induce_via, limit_value, perm_character,
                         regular_character, trivial_character)
from .spectral import (LuckReport, PermutationRep, SpectralMeasure,
                       UnitaryRep, WordPermRep, character_of, fk_det,
                       induced_rep, irreducible_rep, luck_bound_check,
                       moments_check, operator_matrix, phi_betti,
                       pullback_rep, rank_nullity, regular_rep,
                       rep_from_action, spectral_measure)
from .complexes import (EquivariantCWData, FiniteChainComplex,
                        HomologyReport, OrbitCell, QuotientComplex,
                        action_trace, builtin_line_Dinf, builtin_line_Z,
                        builtin_rose_free, builtin_tree_free_by_finite,
                        cw_from_json, cw_to_json, export_boundaries_csv,
                        finite_group_crosscheck, homology, multiplicities,
                        quotient_complex)
from .runner import (ExperimentConfig, LevelRecord, centralizer_growth, emit,
                     farber_diagnostic, rel_farber_diagnostic, run)

__version__ = "0.1.0"
