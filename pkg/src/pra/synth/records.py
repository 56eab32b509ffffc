'''
Module holding PopulationRecord and the column names used to serialize populations
'''
from dataclasses import dataclass

import numpy
import pandas as pnd

AGE_BANDS = ['18..24'] + [ f'{low}-{low + 4}' for low in range(25, 75, 5) ] + ['75']
GENDERS   = ['F', 'M']
SES_NAMES = ['MEDFAMINC', 'PPOV', 'PUNEMP']

# Record frame columns, named after the insurance microdata where a counterpart exists
RECORD_COLUMNS = [
        'id',
        'region',
        'surname',
        'first',
        'race',
        'race_code',
        'gender_code',
        'age_range',
        'average_premium'] + SES_NAMES
#------------------------------------------
@dataclass(frozen=True)
class PopulationRecord:
    '''
    One synthetic or ingested individual

    true_race : Index of the race in the run's RaceCategorySet
    ses       : (MEDFAMINC, PPOV, PUNEMP) of the individual's region
    '''
    id          : int
    true_race   : int
    surname_key : str
    first_key   : str
    region_key  : str
    age_band    : str
    gender      : str
    premium     : float
    ses         : tuple[float, float, float]
    #------------------------------------------
    def __post_init__(self):
        if self.age_band not in AGE_BANDS:
            raise ValueError(f'Invalid age band: {self.age_band}')

        if self.gender not in GENDERS:
            raise ValueError(f'Invalid gender: {self.gender}')

        if not numpy.isfinite(self.premium):
            raise ValueError(f'Premium for record {self.id} is not finite')
#------------------------------------------
def records_from_frame(df : pnd.DataFrame) -> list[PopulationRecord]:
    '''
    Takes record frame, as made by the population generator or microdata loader
    Returns list of PopulationRecord
    '''
    l_rec = []
    for row in df.itertuples(index=False):
        rec = PopulationRecord(
                id          = int(row.id),
                true_race   = int(row.race),
                surname_key = row.surname,
                first_key   = row.first,
                region_key  = row.region,
                age_band    = row.age_range,
                gender      = row.gender_code,
                premium     = float(row.average_premium),
                ses         = (float(row.MEDFAMINC), float(row.PPOV), float(row.PUNEMP)))
        l_rec.append(rec)

    return l_rec
#------------------------------------------
