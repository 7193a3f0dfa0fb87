"""Surrogate pools for hidden-in-plain-sight masking.

Replacements are drawn from these pools so masked transcripts read
naturally instead of showing redaction tokens.
"""

GIVEN_NAMES = (
    "Aaron", "Abigail", "Adam", "Adrian", "Aisha", "Alan", "Albert", "Alexa",
    "Alexander", "Alice", "Alicia", "Allison", "Amanda", "Amber", "Amelia", "Amir",
    "Amy", "Andre", "Andrea", "Andrew", "Angela", "Anita", "Anna", "Anthony",
    "Antonio", "April", "Arthur", "Ashley", "Austin", "Barbara", "Benjamin", "Bethany",
    "Blake", "Bonnie", "Bradley", "Brandon", "Brenda", "Brian", "Brittany", "Bruce",
    "Bryan", "Caleb", "Cameron", "Carl", "Carla", "Carlos", "Carmen", "Carol",
    "Caroline", "Carrie", "Casey", "Catherine", "Cesar", "Charlene", "Charles", "Charlotte",
    "Chase", "Chelsea", "Cheryl", "Christian", "Christina", "Christine", "Christopher", "Cindy",
    "Claire", "Clara", "Clifford", "Cody", "Colin", "Connie", "Connor", "Craig",
    "Crystal", "Curtis", "Cynthia", "Dale", "Damian", "Daniel", "Daniela", "Danielle",
    "Darius", "Darlene", "Darren", "David", "Dawn", "Dean", "Deborah", "Denise",
    "Dennis", "Derek", "Desmond", "Diana", "Diane", "Diego", "Dominic", "Donald",
    "Donna", "Doris", "Dorothy", "Douglas", "Dustin", "Dylan", "Edgar", "Edith",
    "Edward", "Elaine", "Eleanor", "Elena", "Elias", "Elijah", "Elizabeth", "Ella",
    "Ellen", "Emily", "Emma", "Eric", "Erica", "Erik", "Erin", "Ernest",
    "Ethan", "Eugene", "Eva", "Evan", "Evelyn", "Felix", "Fernando", "Fiona",
    "Frances", "Francis", "Frank", "Franklin", "Gabriel", "Gabriela", "Gail", "Garrett",
    "Gary", "Gavin", "George", "Gerald", "Gina", "Giovanni", "Glen", "Gloria",
    "Gordon", "Grace", "Graham", "Grant", "Gregory", "Hannah", "Harold", "Harriet",
    "Harry", "Hazel", "Heather", "Hector", "Helen", "Henry", "Holly", "Howard",
    "Hugo", "Ian", "Irene", "Iris", "Isaac", "Isabel", "Isabella", "Ivan",
    "Jack", "Jacob", "Jacqueline", "Jade", "James", "Jamie", "Jane", "Janet",
    "Janice", "Jared", "Jasmine", "Jason", "Javier", "Jay", "Jean", "Jeffrey",
    "Jenna", "Jennifer", "Jeremy", "Jerome", "Jerry", "Jesse", "Jessica", "Jill",
    "Joan", "Joanna", "Joel", "John", "Jonathan", "Jordan", "Jorge", "Jose",
    "Joseph", "Joshua", "Joyce", "Juan", "Judith", "Julia", "Julian", "Julie",
    "Justin", "Kara", "Karen", "Katherine", "Kathleen", "Kayla", "Keith", "Kelly",
    "Kenneth", "Kevin", "Kimberly", "Kyle", "Laura", "Lauren", "Lawrence", "Leah",
    "Leo", "Leslie", "Liam", "Lillian", "Linda", "Lisa", "Logan", "Louis",
    "Lucas", "Lucia", "Luis", "Luke", "Lydia", "Madison", "Marcus", "Margaret",
    "Maria", "Marie", "Marion", "Mark", "Martha", "Martin", "Mary", "Mateo",
    "Matthew", "Maureen", "Maurice", "Maxwell", "Megan", "Melissa", "Michael", "Michelle",
    "Miguel", "Miles", "Miriam", "Mitchell", "Molly", "Monica", "Morgan", "Nancy",
    "Naomi", "Natalie", "Nathan", "Nicholas", "Nicole", "Nina", "Noah", "Nora",
    "Norman", "Olivia", "Omar", "Oscar", "Owen", "Pamela", "Patricia", "Patrick",
    "Paul", "Paula", "Pedro", "Peter", "Philip", "Phoebe", "Preston", "Priya",
    "Rachel", "Ralph", "Ramon", "Randall", "Raymond", "Rebecca", "Regina", "Renee",
    "Ricardo", "Richard", "Rita", "Robert", "Roberta", "Rodney", "Roger", "Ronald",
    "Rosa", "Rose", "Ross", "Roy", "Ruben", "Russell", "Ruth", "Ryan",
    "Sabrina", "Samantha", "Samuel", "Sandra", "Sara", "Sarah", "Scott", "Sean",
    "Sharon", "Sheila", "Shirley", "Simon", "Sofia", "Sonia", "Spencer", "Stacy",
    "Stanley", "Stephanie", "Stephen", "Steven", "Stuart", "Susan", "Sylvia", "Tamara",
    "Tanya", "Teresa", "Terrence", "Theodore", "Thomas", "Timothy", "Tina", "Todd",
    "Tracy", "Travis", "Trevor", "Tyler", "Valerie", "Vanessa", "Veronica", "Victor",
    "Victoria", "Vincent", "Virginia", "Vivian", "Walter", "Wanda", "Warren", "Wayne",
    "Wendy", "Wesley", "William", "Willie", "Xavier", "Yolanda", "Yvonne", "Zachary",
)

SURNAMES = (
    "Adams", "Aguilar", "Alexander", "Allen", "Alvarez", "Anderson", "Andrews", "Armstrong",
    "Arnold", "Austin", "Bailey", "Baker", "Baldwin", "Banks", "Barber", "Barker",
    "Barnes", "Barrett", "Bates", "Beck", "Bell", "Bennett", "Benson", "Berger",
    "Berry", "Bishop", "Black", "Blair", "Blake", "Bowen", "Bowman", "Boyd",
    "Bradley", "Brady", "Brennan", "Brewer", "Briggs", "Brooks", "Brown", "Bryant",
    "Burgess", "Burke", "Burns", "Burton", "Bush", "Butler", "Byrd", "Cain",
    "Caldwell", "Campbell", "Cannon", "Carey", "Carlson", "Carpenter", "Carr", "Carroll",
    "Carson", "Carter", "Casey", "Castillo", "Castro", "Chambers", "Chan", "Chandler",
    "Chang", "Chapman", "Chavez", "Chen", "Christensen", "Clark", "Clarke", "Clayton",
    "Cohen", "Cole", "Coleman", "Collins", "Conner", "Cook", "Cooper", "Copeland",
    "Cortez", "Costa", "Cox", "Craig", "Crawford", "Cross", "Cruz", "Cunningham",
    "Curry", "Curtis", "Dalton", "Daniels", "Davidson", "Davis", "Dawson", "Day",
    "Dean", "Delgado", "Diaz", "Dixon", "Dominguez", "Donovan", "Dorsey", "Douglas",
    "Doyle", "Drake", "Duffy", "Duncan", "Dunn", "Duran", "Dyer", "Eaton",
    "Edwards", "Elliott", "Ellis", "Emerson", "Erickson", "Espinoza", "Estrada", "Evans",
    "Farmer", "Farrell", "Ferguson", "Fernandez", "Fields", "Figueroa", "Fischer", "Fisher",
    "Fitzgerald", "Fleming", "Fletcher", "Flores", "Flynn", "Foley", "Ford", "Foster",
    "Fowler", "Fox", "Francis", "Franklin", "Frazier", "Freeman", "French", "Frost",
    "Fuentes", "Fuller", "Gallagher", "Garcia", "Gardner", "Garner", "Garrett", "Garza",
    "Gates", "George", "Gibbs", "Gibson", "Gilbert", "Gill", "Glover", "Goldberg",
    "Gomez", "Gonzalez", "Goodman", "Goodwin", "Gordon", "Graham", "Grant", "Graves",
    "Gray", "Green", "Greene", "Gregory", "Griffin", "Griffith", "Gross", "Guerrero",
    "Gutierrez", "Guzman", "Hale", "Haley", "Hall", "Hamilton", "Hammond", "Hampton",
    "Hansen", "Hanson", "Hardin", "Harmon", "Harper", "Harrington", "Harris", "Harrison",
    "Hart", "Harvey", "Hawkins", "Hayes", "Haynes", "Henderson", "Hendricks", "Henry",
    "Hensley", "Herman", "Hernandez", "Herrera", "Hess", "Hicks", "Higgins", "Hill",
    "Hoffman", "Holland", "Holloway", "Holmes", "Holt", "Hood", "Hoover", "Hopkins",
    "Horton", "Houston", "Howard", "Howell", "Hubbard", "Hudson", "Huff", "Hughes",
    "Hull", "Hunt", "Hunter", "Hurst", "Ibarra", "Ingram", "Irwin", "Jackson",
    "Jacobs", "James", "Jarvis", "Jenkins", "Jennings", "Jensen", "Jimenez", "Johns",
    "Johnson", "Johnston", "Jones", "Jordan", "Joseph", "Juarez", "Kane", "Kaufman",
    "Keller", "Kelley", "Kelly", "Kemp", "Kennedy", "Kent", "Kerr", "Kim",
    "King", "Kirby", "Kirk", "Klein", "Knight", "Knox", "Koch", "Kramer",
)

INSTITUTIONS = (
    "Lakeside University", "Northgate College", "Riverbend Institute", "Harborview University",
    "Cedar Valley College", "Summit State University", "Bayfield Academy", "Pinecrest University",
    "Westbrook College", "Stonebridge University", "Maplewood Institute", "Clearwater College",
    "Highland State University", "Oakmont University", "Silverlake College", "Brookfield University",
    "Eastvale Institute", "Granite Peak College", "Willowdale University", "Fairhaven College",
    "Redwood State University", "Larkspur Institute", "Ashford University", "Meadowbrook College",
)

MONTHS = (
    "January", "February", "March", "April", "May", "June",
    "July", "August", "September", "October", "November", "December",
)
